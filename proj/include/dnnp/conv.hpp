// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DNNP_CONV_HPP
#define DNNP_CONV_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "dnnp/common.hpp"
#include "dnnp/gemm.hpp"
#include "dnnp/intdiv.hpp"
#include "dnnp/tensor.hpp"

namespace dnnp {

/// Dense KCRS filter bank.
struct filter_desc {
    dim_t k = 1, c = 1, r = 1, s = 1;
    data_type type = data_type::f32;

    dim_t element_count() const { return k * c * r * s; }
    dim_t offset(dim_t kk, dim_t cc, dim_t rr, dim_t ss) const {
        return ((kk * c + cc) * r + rr) * s + ss;
    }
    bool operator==(const filter_desc &) const = default;
};

filter_desc make_filter_desc(dim_t k, dim_t c, dim_t r, dim_t s, data_type type = data_type::f32);

template <typename T>
class filter_view {
public:
    using value_type = std::remove_const_t<T>;

    filter_view() = default;
    filter_view(const filter_desc &desc, std::span<T> buffer) : desc_(desc), buffer_(buffer) {
        if (desc.type != data_type_v<value_type>)
            throw error(status::type_mismatch, "filter element type differs from descriptor");
        if (static_cast<dim_t>(buffer.size()) < desc.element_count())
            throw error(status::out_of_bounds, "filter buffer too small");
    }

    template <typename U>
        requires(std::is_same_v<T, const U>)
    filter_view(const filter_view<U> &o) : desc_(o.desc()), buffer_(o.buffer()) {}

    const filter_desc &desc() const { return desc_; }
    std::span<T> buffer() const { return buffer_; }
    T *data() const { return buffer_.data(); }
    T &operator()(dim_t k, dim_t c, dim_t r, dim_t s) const {
        return buffer_[static_cast<std::size_t>(desc_.offset(k, c, r, s))];
    }

private:
    filter_desc desc_;
    std::span<T> buffer_;
};

template <typename T>
using cfilter = filter_view<const std::type_identity_t<T>>;

enum class conv_mode { convolution, cross_correlation };

struct conv_desc {
    dim_t u = 1, v = 1;
    dim_t pad_h = 0, pad_w = 0;
    conv_mode mode = conv_mode::convolution;
    /// Add results into the destination instead of overwriting it.
    bool accumulate = false;

    void validate() const;
};

enum class pad_preset { valid, same, full };

/// (pad_h, pad_w) for the MATLAB-style presets: valid (0, 0),
/// same (R/2, S/2) rounded down, full (R-1, S-1).
std::pair<dim_t, dim_t> preset_padding(pad_preset preset, dim_t r, dim_t s);

enum class engine { direct, explicit_lowering, implicit_gemm };

const char *engine_name(engine e);

/// ceil((in - filter + 1 + 2 pad) / stride). Throws empty_output when the
/// numerator is below 1.
dim_t output_extent(dim_t in, dim_t filter, dim_t stride, dim_t pad);

/// Input coordinate read by output index p through filter tap r. The
/// convolution form inverts the filter; cross-correlation does not. The
/// result may fall outside the image, where the input reads as zero.
inline dim_t access(dim_t p, dim_t stride, dim_t filter, dim_t r, dim_t pad,
        conv_mode mode = conv_mode::convolution) {
    return mode == conv_mode::convolution ? p * stride + filter - r - 1 - pad
                                          : p * stride + r - pad;
}

/// Problem extents derived from the descriptors of one convolution.
struct conv_shape {
    dim_t n, c, h, w;
    dim_t k, r, s;
    dim_t p, q;
    dim_t u, v, pad_h, pad_w;
    conv_mode mode;

    dim_t crs() const { return c * r * s; }
    dim_t npq() const { return n * p * q; }
    dim_t rs() const { return r * s; }
    dim_t pq() const { return p * q; }

    /// Filter tap r (resp. s) after the optional inversion.
    dim_t tap_h(dim_t rr) const { return mode == conv_mode::convolution ? r - 1 - rr : rr; }
    dim_t tap_w(dim_t ss) const { return mode == conv_mode::convolution ? s - 1 - ss : ss; }
};

conv_shape make_conv_shape(const tensor_desc &x, const filter_desc &f, const conv_desc &conv);

/// Descriptor for the output of a forward convolution.
tensor_desc conv_output_desc(const tensor_desc &x, const filter_desc &f, const conv_desc &conv,
        layout preset = layout::nchw);

struct conv_options {
    tile_config tiles {};
    /// Upper bound on the lowered data matrix built by the explicit engine.
    std::size_t lowering_limit_bytes = std::size_t(2) << 30;
};

/// y := alpha * conv(x, f) + beta * y; accumulate forces beta = 1.
template <typename T>
void conv_forward(cview<T> x, cfilter<T> f, const conv_desc &conv, engine eng,
        tensor_view<T> y, std::type_identity_t<T> alpha = 1, std::type_identity_t<T> beta = 0,
        const conv_options &opts = {});

/// dx := gradient of <dy, conv(x, f)> with respect to x (added to dx when
/// accumulating).
template <typename T>
void conv_backward_data(cview<T> dy, cfilter<T> f, const conv_desc &conv, engine eng,
        tensor_view<T> dx, const conv_options &opts = {});

/// df := gradient of <dy, conv(x, f)> with respect to f.
template <typename T>
void conv_backward_filter(cview<T> dy, cview<T> x, const conv_desc &conv, engine eng,
        filter_view<T> df, const conv_options &opts = {});

/// db[k] := sum over n, p, q of dy[n, k, p, q]; db is (1, K, 1, 1).
template <typename T>
void conv_backward_bias(cview<T> dy, tensor_view<T> db, bool accumulate = false);

// ---------------------------------------------------------------------------
// Lowering.

/// Index decoding for the lowered matrices: rows of the data matrix are
/// (c, r, s) triples, columns are (n, p, q) triples. Dividers are built
/// once per call.
struct lowering_index {
    explicit lowering_index(const conv_shape &shape);

    struct crs_t { dim_t c, r, s; };
    struct npq_t { dim_t n, p, q; };

    crs_t decode_row(dim_t i) const {
        const auto [c, rs] = by_rs.div_mod(static_cast<std::uint32_t>(i));
        const auto [r, s] = by_s.div_mod(rs);
        return {c, r, s};
    }
    npq_t decode_col(dim_t j) const {
        const auto [n, pq] = by_pq.div_mod(static_cast<std::uint32_t>(j));
        const auto [p, q] = by_q.div_mod(pq);
        return {n, p, q};
    }

    magic_divider by_rs, by_s, by_pq, by_q;
};

/// Materialized lowering: filter matrix K x CRS and data matrix CRS x NPQ,
/// both row-major.
template <typename T>
struct lowered_operands {
    conv_shape shape;
    scratch_vector<T> filter_matrix;
    scratch_vector<T> data_matrix;

    stored_matrix<const T> filter() const {
        return stored_matrix<const T>::row_major(filter_matrix.data(), shape.k, shape.crs());
    }
    stored_matrix<const T> data() const {
        return stored_matrix<const T>::row_major(data_matrix.data(), shape.crs(), shape.npq());
    }
};

template <typename T>
lowered_operands<T> lower_explicit(cview<T> x, cfilter<T> f, const conv_desc &conv,
        std::size_t limit_bytes = conv_options {}.lowering_limit_bytes);

/// The lowered data matrix as a virtual operand over x. Element (i, j) is
/// the zero-extended input read for filter tap i = (c, r, s) and output
/// pixel j = (n, p, q). Transposed swaps the roles of rows and columns.
template <typename T, bool Transposed = false>
class lowered_data_provider {
public:
    lowered_data_provider(cview<T> x, const conv_shape &shape, const lowering_index &index)
        : x_(x), shape_(shape), index_(&index) {}

    dim_t rows() const { return Transposed ? shape_.npq() : shape_.crs(); }
    dim_t cols() const { return Transposed ? shape_.crs() : shape_.npq(); }

    T at(dim_t i, dim_t j) const {
        if constexpr (Transposed) std::swap(i, j);
        const auto [c, r, s] = index_->decode_row(i);
        const auto [n, p, q] = index_->decode_col(j);
        return read(n, c, p * shape_.u - shape_.pad_h + shape_.tap_h(r),
                q * shape_.v - shape_.pad_w + shape_.tap_w(s));
    }

    void fill_tile(dim_t row0, dim_t col0, dim_t nrows, dim_t ncols, T *dst, dim_t ld) const;

private:
    T read(dim_t n, dim_t c, dim_t h, dim_t w) const {
        if (static_cast<std::uint64_t>(h) >= static_cast<std::uint64_t>(shape_.h)
                || static_cast<std::uint64_t>(w) >= static_cast<std::uint64_t>(shape_.w))
            return T(0);
        return x_(n, c, h, w);
    }

    cview<T> x_;
    conv_shape shape_;
    const lowering_index *index_;
};

} // namespace dnnp

#endif
