// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

// Direct evaluation of the convolution sum over a zero-extended input. This
// is the reference the lowering engines are checked against.

#include "conv_internal.hpp"

namespace dnnp::detail {

template <typename T>
void direct_forward(
        cview<T> x, cfilter<T> f, const conv_shape &sh, tensor_view<T> y, T alpha, T beta) {
    const auto &xs = x.desc().strides();
    parallel_for(sh.n * sh.k, [&](dim_t begin, dim_t end) {
        scratch_vector<T> acc(static_cast<std::size_t>(sh.pq()));
        for (dim_t nk = begin; nk < end; ++nk) {
            const dim_t n = nk / sh.k, k = nk % sh.k;
            std::fill(acc.begin(), acc.end(), T(0));
            for (dim_t c = 0; c < sh.c; ++c) {
                const T *plane = x.base() + n * xs[0] + c * xs[1];
                for (dim_t r = 0; r < sh.r; ++r) {
                    const dim_t off_h = sh.tap_h(r) - sh.pad_h;
                    const auto [p_lo, p_hi] = valid_output_range(off_h, sh.u, sh.h, sh.p);
                    for (dim_t s = 0; s < sh.s; ++s) {
                        const T wgt = f(k, c, r, s);
                        const dim_t off_w = sh.tap_w(s) - sh.pad_w;
                        const auto [q_lo, q_hi] = valid_output_range(off_w, sh.v, sh.w, sh.q);
                        for (dim_t p = p_lo; p < p_hi; ++p) {
                            const T *row = plane + (p * sh.u + off_h) * xs[2];
                            T *out = acc.data() + p * sh.q;
                            for (dim_t q = q_lo; q < q_hi; ++q)
                                out[q] += wgt * row[(q * sh.v + off_w) * xs[3]];
                        }
                    }
                }
            }
            for (dim_t p = 0; p < sh.p; ++p)
                for (dim_t q = 0; q < sh.q; ++q) {
                    T &o = y(n, k, p, q);
                    const T v = alpha * acc[static_cast<std::size_t>(p * sh.q + q)];
                    o = beta == T(0) ? v : v + beta * o;
                }
        }
    });
}

template <typename T>
void direct_backward_data(
        cview<T> dy, cfilter<T> f, const conv_shape &sh, tensor_view<T> dx, bool accumulate) {
    clear_unless_accumulating(dx, accumulate);
    const auto &xs = dx.desc().strides();
    // Images own disjoint slices of dx, so scatter needs no synchronization.
    parallel_for(sh.n, [&](dim_t begin, dim_t end) {
        for (dim_t n = begin; n < end; ++n)
            for (dim_t k = 0; k < sh.k; ++k)
                for (dim_t c = 0; c < sh.c; ++c) {
                    T *plane = dx.base() + n * xs[0] + c * xs[1];
                    for (dim_t r = 0; r < sh.r; ++r) {
                        const dim_t off_h = sh.tap_h(r) - sh.pad_h;
                        const auto [p_lo, p_hi] = valid_output_range(off_h, sh.u, sh.h, sh.p);
                        for (dim_t s = 0; s < sh.s; ++s) {
                            const T wgt = f(k, c, r, s);
                            const dim_t off_w = sh.tap_w(s) - sh.pad_w;
                            const auto [q_lo, q_hi] = valid_output_range(off_w, sh.v, sh.w, sh.q);
                            for (dim_t p = p_lo; p < p_hi; ++p) {
                                T *row = plane + (p * sh.u + off_h) * xs[2];
                                for (dim_t q = q_lo; q < q_hi; ++q)
                                    row[(q * sh.v + off_w) * xs[3]] += wgt * dy(n, k, p, q);
                            }
                        }
                    }
                }
    });
}

template <typename T>
void direct_backward_filter(
        cview<T> dy, cview<T> x, const conv_shape &sh, filter_view<T> df, bool accumulate) {
    const auto &xs = x.desc().strides();
    parallel_for(sh.k, [&](dim_t begin, dim_t end) {
        for (dim_t k = begin; k < end; ++k)
            for (dim_t c = 0; c < sh.c; ++c)
                for (dim_t r = 0; r < sh.r; ++r) {
                    const dim_t off_h = sh.tap_h(r) - sh.pad_h;
                    const auto [p_lo, p_hi] = valid_output_range(off_h, sh.u, sh.h, sh.p);
                    for (dim_t s = 0; s < sh.s; ++s) {
                        const dim_t off_w = sh.tap_w(s) - sh.pad_w;
                        const auto [q_lo, q_hi] = valid_output_range(off_w, sh.v, sh.w, sh.q);
                        T sum = 0;
                        for (dim_t n = 0; n < sh.n; ++n) {
                            const T *plane = x.base() + n * xs[0] + c * xs[1];
                            for (dim_t p = p_lo; p < p_hi; ++p) {
                                const T *row = plane + (p * sh.u + off_h) * xs[2];
                                for (dim_t q = q_lo; q < q_hi; ++q)
                                    sum += dy(n, k, p, q) * row[(q * sh.v + off_w) * xs[3]];
                            }
                        }
                        T &out = df(k, c, r, s);
                        out = accumulate ? out + sum : sum;
                    }
                }
    });
}

#define DNNP_INSTANTIATE_DIRECT(T) \
    template void direct_forward<T>(cview<T>, cfilter<T>, const conv_shape &, tensor_view<T>, T, T); \
    template void direct_backward_data<T>( \
            cview<T>, cfilter<T>, const conv_shape &, tensor_view<T>, bool); \
    template void direct_backward_filter<T>( \
            cview<T>, cview<T>, const conv_shape &, filter_view<T>, bool);

DNNP_INSTANTIATE_DIRECT(float)
DNNP_INSTANTIATE_DIRECT(double)

} // namespace dnnp::detail
