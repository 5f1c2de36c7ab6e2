// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

// Implicit GEMM: the lowered data matrix is never stored. The tiled engine
// pulls it through lowered_data_provider one tile slab at a time, and output
// tiles are transposed into the caller's layout as they complete. The only
// transient buffers are the per-worker tile buffers.

#include "conv_internal.hpp"

namespace dnnp::detail {
namespace {

// dO_m restricted to columns [col_offset, col_offset + cols): element
// (k, j) is dy[n, k, p, q] for (n, p, q) = decode(col_offset + j).
template <typename T>
class output_grad_provider {
public:
    output_grad_provider(cview<T> dy, const conv_shape &sh, const lowering_index &idx,
            dim_t col_offset, dim_t cols)
        : dy_(dy), sh_(sh), idx_(&idx), col_offset_(col_offset), cols_(cols) {}

    dim_t rows() const { return sh_.k; }
    dim_t cols() const { return cols_; }

    T at(dim_t k, dim_t j) const {
        const auto pix = idx_->decode_col(col_offset_ + j);
        return dy_(pix.n, k, pix.p, pix.q);
    }

    void fill_tile(dim_t row0, dim_t col0, dim_t nrows, dim_t ncols, T *dst, dim_t ld) const {
        const auto &ys = dy_.desc().strides();
        const npq_cursor first(*idx_, sh_, col_offset_ + col0);
        for (dim_t r = 0; r < nrows; ++r) {
            const T *plane = dy_.base() + (row0 + r) * ys[1];
            npq_cursor pix = first;
            T *out = dst + r * ld;
            for (dim_t c = 0; c < ncols; ++c, pix.advance())
                out[c] = plane[pix.n * ys[0] + pix.p * ys[2] + pix.q * ys[3]];
        }
    }

private:
    cview<T> dy_;
    conv_shape sh_;
    const lowering_index *idx_;
    dim_t col_offset_, cols_;
};

// Stores O_m tiles (rows k, columns (n, p, q)) straight into y.
template <typename T>
class output_tensor_sink {
public:
    output_tensor_sink(tensor_view<T> y, const conv_shape &sh, const lowering_index &idx, T beta)
        : y_(y), sh_(sh), idx_(&idx), beta_(beta) {}

    dim_t rows() const { return sh_.k; }
    dim_t cols() const { return sh_.npq(); }

    void store_tile(dim_t row0, dim_t col0, dim_t nrows, dim_t ncols, const T *acc, dim_t ld,
            T alpha) {
        const auto &ys = y_.desc().strides();
        const npq_cursor first(*idx_, sh_, col0);
        for (dim_t r = 0; r < nrows; ++r) {
            T *plane = y_.base() + (row0 + r) * ys[1];
            npq_cursor pix = first;
            for (dim_t c = 0; c < ncols; ++c, pix.advance()) {
                T &o = plane[pix.n * ys[0] + pix.p * ys[2] + pix.q * ys[3]];
                const T v = alpha * acc[r * ld + c];
                o = beta_ == T(0) ? v : v + beta_ * o;
            }
        }
    }

private:
    tensor_view<T> y_;
    conv_shape sh_;
    const lowering_index *idx_;
    T beta_;
};

// Adds dD_m tiles for one image (rows (c, r, s), columns (p, q)) into dx
// at the input coordinates they were gathered from.
template <typename T>
class scatter_sink {
public:
    scatter_sink(tensor_view<T> dx, const conv_shape &sh, const lowering_index &idx, dim_t n)
        : dx_(dx), sh_(sh), idx_(&idx), n_(n) {}

    dim_t rows() const { return sh_.crs(); }
    dim_t cols() const { return sh_.pq(); }

    void store_tile(dim_t row0, dim_t col0, dim_t nrows, dim_t ncols, const T *acc, dim_t ld,
            T alpha) {
        const auto &xs = dx_.desc().strides();
        T *image = dx_.base() + n_ * xs[0];
        crs_cursor tap(*idx_, sh_, row0);
        const npq_cursor first(*idx_, sh_, n_ * sh_.pq() + col0);
        for (dim_t r = 0; r < nrows; ++r, tap.advance()) {
            const dim_t dh = sh_.tap_h(tap.r) - sh_.pad_h;
            const dim_t dw = sh_.tap_w(tap.s) - sh_.pad_w;
            npq_cursor pix = first;
            for (dim_t c = 0; c < ncols; ++c, pix.advance()) {
                const dim_t h = pix.p * sh_.u + dh, w = pix.q * sh_.v + dw;
                if (in_extent(h, sh_.h) && in_extent(w, sh_.w))
                    image[tap.c * xs[1] + h * xs[2] + w * xs[3]] += alpha * acc[r * ld + c];
            }
        }
    }

private:
    tensor_view<T> dx_;
    conv_shape sh_;
    const lowering_index *idx_;
    dim_t n_;
};

} // namespace

template <typename T>
void implicit_forward(cview<T> x, cfilter<T> f, const conv_shape &sh, tensor_view<T> y, T alpha,
        T beta, const conv_options &opts) {
    const lowering_index idx(sh);
    const auto fm = stored_matrix<const T>::row_major(f.data(), sh.k, sh.crs());
    const lowered_data_provider<T> dm(x, sh, idx);
    output_tensor_sink<T> sink(y, sh, idx, beta);
    gemm_tiled<T>(fm, dm, sink, alpha, opts.tiles);
}

template <typename T>
void implicit_backward_data(cview<T> dy, cfilter<T> f, const conv_shape &sh, tensor_view<T> dx,
        bool accumulate, const conv_options &opts) {
    clear_unless_accumulating(dx, accumulate);
    const lowering_index idx(sh);
    const auto fmt = stored_matrix<const T>::row_major(f.data(), sh.k, sh.crs()).transposed();
    // Tiles of one image may scatter onto the same dx element, so each
    // image runs sequentially; distinct images own disjoint slices of dx.
    parallel_for(sh.n, [&](dim_t begin, dim_t end) {
        for (dim_t n = begin; n < end; ++n) {
            const output_grad_provider<T> dom(dy, sh, idx, n * sh.pq(), sh.pq());
            scatter_sink<T> sink(dx, sh, idx, n);
            gemm_tiled<T>(fmt, dom, sink, T(1), opts.tiles, execution::sequential);
        }
    });
}

template <typename T>
void implicit_backward_filter(cview<T> dy, cview<T> x, const conv_shape &sh, filter_view<T> df,
        bool accumulate, const conv_options &opts) {
    const lowering_index idx(sh);
    const output_grad_provider<T> dom(dy, sh, idx, 0, sh.npq());
    const lowered_data_provider<T, true> dmt(x, sh, idx);
    gemm<T>(dom, dmt, stored_matrix<T>::row_major(df.data(), sh.k, sh.crs()), T(1),
            accumulate ? T(1) : T(0), opts.tiles);
}

#define DNNP_INSTANTIATE_IMPLICIT(T) \
    template void implicit_forward<T>(cview<T>, cfilter<T>, const conv_shape &, tensor_view<T>, \
            T, T, const conv_options &); \
    template void implicit_backward_data<T>(cview<T>, cfilter<T>, const conv_shape &, \
            tensor_view<T>, bool, const conv_options &); \
    template void implicit_backward_filter<T>(cview<T>, cview<T>, const conv_shape &, \
            filter_view<T>, bool, const conv_options &);

DNNP_INSTANTIATE_IMPLICIT(float)
DNNP_INSTANTIATE_IMPLICIT(double)

} // namespace dnnp::detail
