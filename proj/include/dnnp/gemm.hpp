// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DNNP_GEMM_HPP
#define DNNP_GEMM_HPP

#include <algorithm>
#include <concepts>
#include <string>
#include <type_traits>
#include <utility>

#include "dnnp/common.hpp"

namespace dnnp {

/// A matrix operand the tiled engine can read. fill_tile writes the block
/// [row0, row0 + nrows) x [col0, col0 + ncols) into dst with leading
/// dimension ld; the engine guarantees the block is in range.
template <typename P, typename T>
concept tile_provider = requires(const P &p, dim_t i, dim_t j, T *dst) {
    { p.rows() } -> std::convertible_to<dim_t>;
    { p.cols() } -> std::convertible_to<dim_t>;
    { p.at(i, j) } -> std::convertible_to<T>;
    p.fill_tile(i, j, i, j, dst, j);
};

/// Strided view over caller storage.
template <typename T>
class stored_matrix {
public:
    using value_type = std::remove_const_t<T>;

    stored_matrix(T *data, dim_t rows, dim_t cols, dim_t row_stride, dim_t col_stride = 1)
        : data_(data), rows_(rows), cols_(cols), row_stride_(row_stride), col_stride_(col_stride) {}

    /// Dense row-major rows x cols.
    static stored_matrix row_major(T *data, dim_t rows, dim_t cols) {
        return stored_matrix(data, rows, cols, cols, 1);
    }

    template <typename U>
        requires(std::is_same_v<T, const U>)
    stored_matrix(const stored_matrix<U> &o)
        : stored_matrix(o.data(), o.rows(), o.cols(), o.row_stride(), o.col_stride()) {}

    dim_t rows() const { return rows_; }
    dim_t cols() const { return cols_; }
    dim_t row_stride() const { return row_stride_; }
    dim_t col_stride() const { return col_stride_; }
    T *data() const { return data_; }

    T &ref(dim_t i, dim_t j) const { return data_[i * row_stride_ + j * col_stride_]; }
    value_type at(dim_t i, dim_t j) const { return ref(i, j); }

    void fill_tile(dim_t row0, dim_t col0, dim_t nrows, dim_t ncols, value_type *dst,
            dim_t ld) const {
        for (dim_t r = 0; r < nrows; ++r) {
            const T *src = data_ + (row0 + r) * row_stride_ + col0 * col_stride_;
            value_type *out = dst + r * ld;
            if (col_stride_ == 1)
                std::copy(src, src + ncols, out);
            else
                for (dim_t c = 0; c < ncols; ++c)
                    out[c] = src[c * col_stride_];
        }
    }

    /// Transposed view over the same storage.
    stored_matrix transposed() const {
        return stored_matrix(data_, cols_, rows_, col_stride_, row_stride_);
    }

private:
    T *data_;
    dim_t rows_, cols_, row_stride_, col_stride_;
};

/// A matrix defined by an index rule (i, j) -> value instead of storage.
/// The default tile fill evaluates the rule cell by cell; providers with a
/// cheaper bulk path implement tile_provider directly.
template <typename T, typename Rule>
class virtual_matrix {
public:
    using value_type = T;

    virtual_matrix(dim_t rows, dim_t cols, Rule rule)
        : rows_(rows), cols_(cols), rule_(std::move(rule)) {}

    dim_t rows() const { return rows_; }
    dim_t cols() const { return cols_; }
    T at(dim_t i, dim_t j) const { return rule_(i, j); }

    void fill_tile(dim_t row0, dim_t col0, dim_t nrows, dim_t ncols, T *dst, dim_t ld) const {
        for (dim_t r = 0; r < nrows; ++r)
            for (dim_t c = 0; c < ncols; ++c)
                dst[r * ld + c] = rule_(row0 + r, col0 + c);
    }

private:
    dim_t rows_, cols_;
    Rule rule_;
};

template <typename T, typename Rule>
virtual_matrix<T, Rule> make_virtual_matrix(dim_t rows, dim_t cols, Rule rule) {
    return virtual_matrix<T, Rule>(rows, cols, std::move(rule));
}

struct tile_config {
    dim_t tile_m = 64;
    dim_t tile_n = 64;
    dim_t tile_k = 8;

    void validate() const {
        if (tile_m < 1 || tile_n < 1 || tile_k < 1)
            throw error(status::config_invalid, "tile extents must be positive");
    }
};

enum class execution { parallel, sequential };

/// Receives finished output tiles. acc holds nrows x ncols values of A*B
/// with leading dimension ld.
template <typename S, typename T>
concept tile_sink = requires(S &s, dim_t i, const T *acc, T alpha) {
    { s.rows() } -> std::convertible_to<dim_t>;
    { s.cols() } -> std::convertible_to<dim_t>;
    s.store_tile(i, i, i, i, acc, i, alpha);
};

/// Sink writing C := alpha * acc + beta * C into stored storage.
template <typename T>
class stored_sink {
public:
    stored_sink(stored_matrix<T> c, T beta) : c_(c), beta_(beta) {}

    dim_t rows() const { return c_.rows(); }
    dim_t cols() const { return c_.cols(); }

    void store_tile(dim_t row0, dim_t col0, dim_t nrows, dim_t ncols, const T *acc, dim_t ld,
            T alpha) {
        for (dim_t r = 0; r < nrows; ++r)
            for (dim_t c = 0; c < ncols; ++c) {
                T &out = c_.ref(row0 + r, col0 + c);
                const T v = alpha * acc[r * ld + c];
                out = beta_ == T(0) ? v : v + beta_ * out;
            }
    }

private:
    stored_matrix<T> c_;
    T beta_;
};

namespace detail {
template <typename T>
void zero_fill(T *p, dim_t count) {
    std::fill(p, p + count, T(0));
}

// acc[mn x nn] += a_tile[mn x kn] * b_tile[kn x nn], k-major: each output
// element accumulates its products in increasing k.
template <typename T>
inline void tile_kernel(const T *__restrict a, const T *__restrict b, T *__restrict acc, dim_t mn,
        dim_t nn, dim_t kn, dim_t tk, dim_t tn) {
    for (dim_t i = 0; i < mn; ++i) {
        T *__restrict row = acc + i * tn;
        const T *__restrict arow = a + i * tk;
        for (dim_t kk = 0; kk < kn; ++kk) {
            const T av = arow[kk];
            const T *__restrict brow = b + kk * tn;
            for (dim_t j = 0; j < nn; ++j)
                row[j] += av * brow[j];
        }
    }
}
} // namespace detail

/// Tiled product sink <- alpha * A * B. Each (tile_m x tile_n) output tile
/// is accumulated from tile_k-deep slabs of A and B copied into local tile
/// buffers; cells of a slab past the matrix edge are zero. Output tiles are
/// distributed over threads unless exec is sequential.
template <typename T, typename A, typename B, typename Sink>
    requires tile_provider<A, T> && tile_provider<B, T> && tile_sink<Sink, T>
void gemm_tiled(const A &a, const B &b, Sink &sink, T alpha, const tile_config &cfg = {},
        execution exec = execution::parallel) {
    cfg.validate();
    const dim_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k || sink.rows() != m || sink.cols() != n)
        throw error(status::dim_mismatch,
                "gemm operands " + std::to_string(m) + "x" + std::to_string(k) + " * "
                        + std::to_string(b.rows()) + "x" + std::to_string(n) + " -> "
                        + std::to_string(sink.rows()) + "x" + std::to_string(sink.cols()));
    if (m == 0 || n == 0) return;

    const dim_t tm = cfg.tile_m, tn = cfg.tile_n, tk = cfg.tile_k;
    const dim_t tiles_m = (m + tm - 1) / tm;
    const dim_t tiles_n = (n + tn - 1) / tn;

    auto work = [&](dim_t begin, dim_t end) {
        scratch_vector<T> a_tile(static_cast<std::size_t>(tm * tk));
        scratch_vector<T> b_tile(static_cast<std::size_t>(tk * tn));
        scratch_vector<T> acc(static_cast<std::size_t>(tm * tn));
        for (dim_t t = begin; t < end; ++t) {
            const dim_t i0 = (t / tiles_n) * tm, j0 = (t % tiles_n) * tn;
            const dim_t mn = std::min(tm, m - i0), nn = std::min(tn, n - j0);
            detail::zero_fill(acc.data(), tm * tn);
            for (dim_t k0 = 0; k0 < k; k0 += tk) {
                const dim_t kn = std::min(tk, k - k0);
                if (mn < tm || kn < tk) detail::zero_fill(a_tile.data(), tm * tk);
                if (kn < tk || nn < tn) detail::zero_fill(b_tile.data(), tk * tn);
                a.fill_tile(i0, k0, mn, kn, a_tile.data(), tk);
                b.fill_tile(k0, j0, kn, nn, b_tile.data(), tn);
                detail::tile_kernel(a_tile.data(), b_tile.data(), acc.data(), mn, nn, kn, tk, tn);
            }
            sink.store_tile(i0, j0, mn, nn, acc.data(), tn, alpha);
        }
    };

    if (exec == execution::sequential)
        work(0, tiles_m * tiles_n);
    else
        parallel_for(tiles_m * tiles_n, work);
}

/// C := alpha * A * B + beta * C. beta == 0 never reads C.
template <typename T, typename A, typename B>
    requires tile_provider<A, T> && tile_provider<B, T>
void gemm(const A &a, const B &b, stored_matrix<T> c, std::type_identity_t<T> alpha,
        std::type_identity_t<T> beta, const tile_config &cfg = {},
        execution exec = execution::parallel) {
    stored_sink<T> sink(c, beta);
    gemm_tiled<T>(a, b, sink, alpha, cfg, exec);
}

} // namespace dnnp

#endif
