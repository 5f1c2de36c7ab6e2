// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DNNP_SRC_CONV_INTERNAL_HPP
#define DNNP_SRC_CONV_INTERNAL_HPP

#include <algorithm>

#include "dnnp/conv.hpp"

namespace dnnp::detail {

// Walks (c, r, s) rows of the lowered matrix in order. Only the starting
// index is decoded with dividers; stepping carries like an odometer.
struct crs_cursor {
    dim_t c, r, s;
    dim_t extent_r, extent_s;

    crs_cursor(const lowering_index &idx, const conv_shape &sh, dim_t i)
        : extent_r(sh.r), extent_s(sh.s) {
        const auto d = idx.decode_row(i);
        c = d.c, r = d.r, s = d.s;
    }
    void advance() {
        if (++s == extent_s) {
            s = 0;
            if (++r == extent_r) {
                r = 0;
                ++c;
            }
        }
    }
};

struct npq_cursor {
    dim_t n, p, q;
    dim_t extent_p, extent_q;

    npq_cursor(const lowering_index &idx, const conv_shape &sh, dim_t j)
        : extent_p(sh.p), extent_q(sh.q) {
        const auto d = idx.decode_col(j);
        n = d.n, p = d.p, q = d.q;
    }
    void advance() {
        if (++q == extent_q) {
            q = 0;
            if (++p == extent_p) {
                p = 0;
                ++n;
            }
        }
    }
};

inline bool in_extent(dim_t i, dim_t extent) {
    return static_cast<std::uint64_t>(i) < static_cast<std::uint64_t>(extent);
}

// Output indices [lo, hi) whose input coordinate idx * stride + offset lies
// inside [0, extent).
inline std::pair<dim_t, dim_t> valid_output_range(
        dim_t offset, dim_t stride, dim_t extent, dim_t out_extent) {
    dim_t lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
    dim_t last = extent - 1 - offset;
    dim_t hi = last < 0 ? 0 : last / stride + 1;
    lo = std::min(lo, out_extent);
    hi = std::clamp(hi, lo, out_extent);
    return {lo, hi};
}

void check_forward(const conv_shape &sh, const tensor_desc &y);

template <typename T>
void direct_forward(cview<T> x, cfilter<T> f, const conv_shape &sh, tensor_view<T> y, T alpha,
        T beta);
template <typename T>
void direct_backward_data(cview<T> dy, cfilter<T> f, const conv_shape &sh, tensor_view<T> dx,
        bool accumulate);
template <typename T>
void direct_backward_filter(cview<T> dy, cview<T> x, const conv_shape &sh, filter_view<T> df,
        bool accumulate);

template <typename T>
void explicit_forward(cview<T> x, cfilter<T> f, const conv_shape &sh, const conv_desc &conv,
        tensor_view<T> y, T alpha, T beta, const conv_options &opts);
template <typename T>
void explicit_backward_data(cview<T> dy, cfilter<T> f, const conv_shape &sh, tensor_view<T> dx,
        bool accumulate, const conv_options &opts);
template <typename T>
void explicit_backward_filter(cview<T> dy, cview<T> x, const conv_shape &sh,
        const conv_desc &conv, filter_view<T> df, bool accumulate, const conv_options &opts);

template <typename T>
void implicit_forward(cview<T> x, cfilter<T> f, const conv_shape &sh, tensor_view<T> y, T alpha,
        T beta, const conv_options &opts);
template <typename T>
void implicit_backward_data(cview<T> dy, cfilter<T> f, const conv_shape &sh, tensor_view<T> dx,
        bool accumulate, const conv_options &opts);
template <typename T>
void implicit_backward_filter(cview<T> dy, cview<T> x, const conv_shape &sh, filter_view<T> df,
        bool accumulate, const conv_options &opts);

// dx := beta * dx for beta in {0, 1}; beta == 0 clears without reading.
template <typename T>
void clear_unless_accumulating(tensor_view<T> t, bool accumulate) {
    if (accumulate) return;
    const tensor_desc &d = t.desc();
    for_each_coord(d, [&](dim_t n, dim_t c, dim_t h, dim_t w) { t(n, c, h, w) = T(0); });
}

} // namespace dnnp::detail

#endif
