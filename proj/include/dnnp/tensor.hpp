// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DNNP_TENSOR_HPP
#define DNNP_TENSOR_HPP

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>

#include "dnnp/common.hpp"

namespace dnnp {

enum class layout { nchw, nhwc, custom };

/// Shape and strides of a 4-D tensor. Strides are in elements and may be
/// negative; the only structural requirement is that no two in-box
/// coordinates map to the same offset. Descriptors never own data.
class tensor_desc {
public:
    using dims_t = std::array<dim_t, 4>;

    tensor_desc() = default;

    dim_t n() const { return dims_[0]; }
    dim_t c() const { return dims_[1]; }
    dim_t h() const { return dims_[2]; }
    dim_t w() const { return dims_[3]; }
    dim_t stride_n() const { return strides_[0]; }
    dim_t stride_c() const { return strides_[1]; }
    dim_t stride_h() const { return strides_[2]; }
    dim_t stride_w() const { return strides_[3]; }

    const dims_t &dims() const { return dims_; }
    const dims_t &strides() const { return strides_; }
    data_type type() const { return type_; }

    dim_t element_count() const { return dims_[0] * dims_[1] * dims_[2] * dims_[3]; }

    dim_t offset(dim_t n, dim_t c, dim_t h, dim_t w) const {
        return n * strides_[0] + c * strides_[1] + h * strides_[2] + w * strides_[3];
    }

    /// Smallest and largest offsets reached inside the extent box.
    dim_t min_offset() const;
    dim_t max_offset() const;

    bool same_extents(const tensor_desc &other) const { return dims_ == other.dims_; }

    bool operator==(const tensor_desc &) const = default;

    std::string to_string() const;

private:
    friend tensor_desc make_desc(dim_t, dim_t, dim_t, dim_t, layout,
            std::optional<dims_t>, data_type);

    dims_t dims_ {1, 1, 1, 1};
    dims_t strides_ {1, 1, 1, 1};
    data_type type_ = data_type::f32;
};

/// Builds a validated descriptor. NCHW gives strides (CHW, HW, W, 1) and
/// NHWC gives (HWC, 1, WC, C). Custom strides are required iff the layout
/// is custom.
tensor_desc make_desc(dim_t n, dim_t c, dim_t h, dim_t w, layout preset = layout::nchw,
        std::optional<tensor_desc::dims_t> custom_strides = std::nullopt,
        data_type type = data_type::f32);

/// True when (n,c,h,w) -> sum(idx * stride) is one-to-one over the box.
bool strides_injective(const tensor_desc::dims_t &dims, const tensor_desc::dims_t &strides);

/// Non-owning strided view. `origin` is the buffer index of coordinate
/// (0,0,0,0), which lets negative strides address a buffer from its end.
template <typename T>
class tensor_view {
public:
    using value_type = std::remove_const_t<T>;

    tensor_view() = default;
    tensor_view(const tensor_desc &desc, std::span<T> buffer, dim_t origin = 0)
        : desc_(desc), buffer_(buffer), origin_(origin) {
        if (desc.type() != data_type_v<value_type>)
            throw error(status::type_mismatch,
                    std::string("descriptor holds ") + data_type_name(desc.type())
                            + ", view element type is " + data_type_name(data_type_v<value_type>));
        if (origin + desc.min_offset() < 0
                || origin + desc.max_offset() >= static_cast<dim_t>(buffer.size()))
            throw error(status::out_of_bounds,
                    desc.to_string() + " does not fit a buffer of "
                            + std::to_string(buffer.size()) + " elements");
    }

    template <typename U>
        requires(std::is_same_v<T, const U>)
    tensor_view(const tensor_view<U> &other)
        : desc_(other.desc()), buffer_(other.buffer()), origin_(other.origin()) {}

    const tensor_desc &desc() const { return desc_; }
    std::span<T> buffer() const { return buffer_; }
    dim_t origin() const { return origin_; }

    /// Pointer to coordinate (0,0,0,0).
    T *base() const { return buffer_.data() + origin_; }

    T &operator()(dim_t n, dim_t c, dim_t h, dim_t w) const {
        return base()[desc_.offset(n, c, h, w)];
    }

    /// Address range actually touched by the view, [first, last].
    const value_type *first_address() const { return base() + desc_.min_offset(); }
    const value_type *last_address() const { return base() + desc_.max_offset(); }

private:
    tensor_desc desc_;
    std::span<T> buffer_;
    dim_t origin_ = 0;
};

template <typename A, typename B>
bool views_overlap(const tensor_view<A> &a, const tensor_view<B> &b) {
    const void *a_lo = a.first_address(), *a_hi = a.last_address();
    const void *b_lo = b.first_address(), *b_hi = b.last_address();
    std::less_equal<const void *> le;
    return le(a_lo, b_hi) && le(b_lo, a_hi);
}

template <typename T>
using cview = tensor_view<const std::type_identity_t<T>>;

/// dst := alpha * src + beta * dst coordinate-wise. Extents must match,
/// strides may differ. beta == 0 never reads dst.
template <typename T>
void transform(cview<T> src, tensor_view<T> dst, std::type_identity_t<T> alpha,
        std::type_identity_t<T> beta);

/// out := alpha * bias + beta * out where each bias extent is either the
/// matching out extent or 1 (broadcast).
template <typename T>
void add_broadcast(cview<T> bias, tensor_view<T> out, std::type_identity_t<T> alpha,
        std::type_identity_t<T> beta);

/// Calls fn(n, c, h, w) for every coordinate in the box, w fastest.
template <typename Fn>
void for_each_coord(const tensor_desc &d, Fn &&fn) {
    for (dim_t n = 0; n < d.n(); ++n)
        for (dim_t c = 0; c < d.c(); ++c)
            for (dim_t h = 0; h < d.h(); ++h)
                for (dim_t w = 0; w < d.w(); ++w)
                    fn(n, c, h, w);
}

} // namespace dnnp

#endif
