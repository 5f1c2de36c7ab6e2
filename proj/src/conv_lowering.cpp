// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

// Explicit lowering: the data matrix is gathered into memory (duplicating
// each input element up to R*S times) and handed to the tiled engine as a
// stored operand.

#include "conv_internal.hpp"

namespace dnnp {

template <typename T, bool Transposed>
void lowered_data_provider<T, Transposed>::fill_tile(
        dim_t row0, dim_t col0, dim_t nrows, dim_t ncols, T *dst, dim_t ld) const {
    const auto &xs = x_.desc().strides();
    const T *base = x_.base();
    const conv_shape &sh = shape_;

    auto element = [&](const detail::crs_cursor &tap, const detail::npq_cursor &pix) {
        const dim_t h = pix.p * sh.u + sh.tap_h(tap.r) - sh.pad_h;
        const dim_t w = pix.q * sh.v + sh.tap_w(tap.s) - sh.pad_w;
        if (!detail::in_extent(h, sh.h) || !detail::in_extent(w, sh.w)) return T(0);
        return base[pix.n * xs[0] + tap.c * xs[1] + h * xs[2] + w * xs[3]];
    };

    if constexpr (!Transposed) {
        detail::crs_cursor tap(*index_, sh, row0);
        const detail::npq_cursor first_pix(*index_, sh, col0);
        for (dim_t r = 0; r < nrows; ++r, tap.advance()) {
            detail::npq_cursor pix = first_pix;
            T *out = dst + r * ld;
            for (dim_t c = 0; c < ncols; ++c, pix.advance())
                out[c] = element(tap, pix);
        }
    } else {
        detail::npq_cursor pix(*index_, sh, row0);
        const detail::crs_cursor first_tap(*index_, sh, col0);
        for (dim_t r = 0; r < nrows; ++r, pix.advance()) {
            detail::crs_cursor tap = first_tap;
            T *out = dst + r * ld;
            for (dim_t c = 0; c < ncols; ++c, tap.advance())
                out[c] = element(tap, pix);
        }
    }
}

template class lowered_data_provider<float, false>;
template class lowered_data_provider<float, true>;
template class lowered_data_provider<double, false>;
template class lowered_data_provider<double, true>;

namespace {

void check_lowering_size(const conv_shape &sh, std::size_t elem_size, std::size_t limit) {
    const double bytes = static_cast<double>(sh.crs()) * static_cast<double>(sh.npq())
            * static_cast<double>(elem_size);
    if (bytes > static_cast<double>(limit))
        throw error(status::alloc_too_large,
                "lowered data matrix " + std::to_string(sh.crs()) + "x" + std::to_string(sh.npq())
                        + " exceeds the " + std::to_string(limit) + "-byte limit");
}

// D_m[(c, r, s), (n, p, q)] = x0[n, c, access(p, r), access(q, s)].
template <typename T>
scratch_vector<T> gather_data_matrix(cview<T> x, const conv_shape &sh) {
    scratch_vector<T> dm(static_cast<std::size_t>(sh.crs() * sh.npq()));
    const dim_t npq = sh.npq();
    parallel_for(sh.crs(), [&](dim_t begin, dim_t end) {
        for (dim_t i = begin; i < end; ++i) {
            const dim_t c = i / sh.rs(), r = (i / sh.s) % sh.r, s = i % sh.s;
            T *row = dm.data() + i * npq;
            for (dim_t n = 0; n < sh.n; ++n)
                for (dim_t p = 0; p < sh.p; ++p) {
                    const dim_t h = access(p, sh.u, sh.r, r, sh.pad_h, sh.mode);
                    for (dim_t q = 0; q < sh.q; ++q) {
                        const dim_t w = access(q, sh.v, sh.s, s, sh.pad_w, sh.mode);
                        const bool inside = h >= 0 && h < sh.h && w >= 0 && w < sh.w;
                        row[(n * sh.p + p) * sh.q + q] = inside ? x(n, c, h, w) : T(0);
                    }
                }
        }
    });
    return dm;
}

// dO_m[k, (n, p, q)] = dy[n, k, p, q], densely.
template <typename T>
scratch_vector<T> gather_output_matrix(cview<T> dy, const conv_shape &sh) {
    scratch_vector<T> om(static_cast<std::size_t>(sh.k * sh.npq()));
    for (dim_t k = 0; k < sh.k; ++k)
        for (dim_t n = 0; n < sh.n; ++n)
            for (dim_t p = 0; p < sh.p; ++p)
                for (dim_t q = 0; q < sh.q; ++q)
                    om[static_cast<std::size_t>(k * sh.npq() + (n * sh.p + p) * sh.q + q)]
                            = dy(n, k, p, q);
    return om;
}

template <typename T>
stored_matrix<const T> filter_matrix(cfilter<T> f, const conv_shape &sh) {
    return stored_matrix<const T>::row_major(f.data(), sh.k, sh.crs());
}

} // namespace

template <typename T>
lowered_operands<T> lower_explicit(
        cview<T> x, cfilter<T> f, const conv_desc &conv, std::size_t limit_bytes) {
    const conv_shape sh = make_conv_shape(x.desc(), f.desc(), conv);
    check_lowering_size(sh, sizeof(T), limit_bytes);
    lowered_operands<T> out {sh, {}, gather_data_matrix<T>(x, sh)};
    out.filter_matrix.assign(f.data(), f.data() + f.desc().element_count());
    return out;
}

namespace detail {

template <typename T>
void explicit_forward(cview<T> x, cfilter<T> f, const conv_shape &sh, const conv_desc &,
        tensor_view<T> y, T alpha, T beta, const conv_options &opts) {
    check_lowering_size(sh, sizeof(T), opts.lowering_limit_bytes);
    const scratch_vector<T> dm = gather_data_matrix<T>(x, sh);
    scratch_vector<T> om(static_cast<std::size_t>(sh.k * sh.npq()));
    gemm<T>(filter_matrix<T>(f, sh),
            stored_matrix<const T>::row_major(dm.data(), sh.crs(), sh.npq()),
            stored_matrix<T>::row_major(om.data(), sh.k, sh.npq()), T(1), T(0), opts.tiles);

    // O_m is K x NPQ; transpose into the caller's layout.
    parallel_for(sh.n * sh.k, [&](dim_t begin, dim_t end) {
        for (dim_t nk = begin; nk < end; ++nk) {
            const dim_t n = nk / sh.k, k = nk % sh.k;
            const T *src = om.data() + k * sh.npq() + n * sh.pq();
            for (dim_t p = 0; p < sh.p; ++p)
                for (dim_t q = 0; q < sh.q; ++q) {
                    T &o = y(n, k, p, q);
                    const T v = alpha * src[p * sh.q + q];
                    o = beta == T(0) ? v : v + beta * o;
                }
        }
    });
}

template <typename T>
void explicit_backward_data(cview<T> dy, cfilter<T> f, const conv_shape &sh, tensor_view<T> dx,
        bool accumulate, const conv_options &opts) {
    check_lowering_size(sh, sizeof(T), opts.lowering_limit_bytes);
    const scratch_vector<T> om = gather_output_matrix<T>(dy, sh);
    scratch_vector<T> ddm(static_cast<std::size_t>(sh.crs() * sh.npq()));
    gemm<T>(filter_matrix<T>(f, sh).transposed(),
            stored_matrix<const T>::row_major(om.data(), sh.k, sh.npq()),
            stored_matrix<T>::row_major(ddm.data(), sh.crs(), sh.npq()), T(1), T(0), opts.tiles);

    clear_unless_accumulating(dx, accumulate);
    // Scatter the lowered gradient back; each image is owned by one worker.
    parallel_for(sh.n, [&](dim_t begin, dim_t end) {
        for (dim_t n = begin; n < end; ++n)
            for (dim_t i = 0; i < sh.crs(); ++i) {
                const dim_t c = i / sh.rs(), r = (i / sh.s) % sh.r, s = i % sh.s;
                const T *row = ddm.data() + i * sh.npq() + n * sh.pq();
                for (dim_t p = 0; p < sh.p; ++p) {
                    const dim_t h = access(p, sh.u, sh.r, r, sh.pad_h, sh.mode);
                    if (h < 0 || h >= sh.h) continue;
                    for (dim_t q = 0; q < sh.q; ++q) {
                        const dim_t w = access(q, sh.v, sh.s, s, sh.pad_w, sh.mode);
                        if (w < 0 || w >= sh.w) continue;
                        dx(n, c, h, w) += row[p * sh.q + q];
                    }
                }
            }
    });
}

template <typename T>
void explicit_backward_filter(cview<T> dy, cview<T> x, const conv_shape &sh, const conv_desc &,
        filter_view<T> df, bool accumulate, const conv_options &opts) {
    check_lowering_size(sh, sizeof(T), opts.lowering_limit_bytes);
    const scratch_vector<T> dm = gather_data_matrix<T>(x, sh);
    const scratch_vector<T> om = gather_output_matrix<T>(dy, sh);
    gemm<T>(stored_matrix<const T>::row_major(om.data(), sh.k, sh.npq()),
            stored_matrix<const T>::row_major(dm.data(), sh.crs(), sh.npq()).transposed(),
            stored_matrix<T>::row_major(df.data(), sh.k, sh.crs()), T(1),
            accumulate ? T(1) : T(0), opts.tiles);
}

#define DNNP_INSTANTIATE_EXPLICIT(T) \
    template void explicit_forward<T>(cview<T>, cfilter<T>, const conv_shape &, \
            const conv_desc &, tensor_view<T>, T, T, const conv_options &); \
    template void explicit_backward_data<T>(cview<T>, cfilter<T>, const conv_shape &, \
            tensor_view<T>, bool, const conv_options &); \
    template void explicit_backward_filter<T>(cview<T>, cview<T>, const conv_shape &, \
            const conv_desc &, filter_view<T>, bool, const conv_options &);

DNNP_INSTANTIATE_EXPLICIT(float)
DNNP_INSTANTIATE_EXPLICIT(double)

} // namespace detail

template lowered_operands<float> lower_explicit<float>(
        cview<float>, cfilter<float>, const conv_desc &, std::size_t);
template lowered_operands<double> lower_explicit<double>(
        cview<double>, cfilter<double>, const conv_desc &, std::size_t);

} // namespace dnnp
