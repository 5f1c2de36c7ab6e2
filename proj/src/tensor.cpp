// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dnnp/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <utility>
#include <vector>

namespace dnnp {

namespace {
// Boxes above this are not enumerated when the nested-span test is
// inconclusive; such layouts are rejected as aliasing.
constexpr dim_t max_enumerated_box = dim_t(1) << 24;
} // namespace

dim_t tensor_desc::min_offset() const {
    dim_t off = 0;
    for (int i = 0; i < 4; ++i)
        if (strides_[i] < 0) off += strides_[i] * (dims_[i] - 1);
    return off;
}

dim_t tensor_desc::max_offset() const {
    dim_t off = 0;
    for (int i = 0; i < 4; ++i)
        if (strides_[i] > 0) off += strides_[i] * (dims_[i] - 1);
    return off;
}

std::string tensor_desc::to_string() const {
    std::ostringstream os;
    os << data_type_name(type_) << "[" << dims_[0] << "," << dims_[1] << "," << dims_[2] << ","
       << dims_[3] << "]/(" << strides_[0] << "," << strides_[1] << "," << strides_[2] << ","
       << strides_[3] << ")";
    return os.str();
}

bool strides_injective(const tensor_desc::dims_t &dims, const tensor_desc::dims_t &strides) {
    std::vector<std::pair<dim_t, dim_t>> active; // (|stride|, extent)
    for (int i = 0; i < 4; ++i) {
        if (dims[i] <= 1) continue;
        if (strides[i] == 0) return false;
        active.emplace_back(strides[i] < 0 ? -strides[i] : strides[i], dims[i]);
    }
    std::sort(active.begin(), active.end());

    // Nested layouts: each stride clears the span of everything finer.
    dim_t span = 0;
    bool nested = true;
    for (auto [stride, extent] : active) {
        if (stride <= span) {
            nested = false;
            break;
        }
        span += stride * (extent - 1);
    }
    if (nested) return true;

    dim_t box = 1;
    for (auto [stride, extent] : active)
        box *= extent;
    if (box > max_enumerated_box) return false;

    std::vector<dim_t> offsets;
    offsets.reserve(static_cast<std::size_t>(box));
    for (dim_t n = 0; n < dims[0]; ++n)
        for (dim_t c = 0; c < dims[1]; ++c)
            for (dim_t h = 0; h < dims[2]; ++h)
                for (dim_t w = 0; w < dims[3]; ++w)
                    offsets.push_back(
                            n * strides[0] + c * strides[1] + h * strides[2] + w * strides[3]);
    std::sort(offsets.begin(), offsets.end());
    return std::adjacent_find(offsets.begin(), offsets.end()) == offsets.end();
}

tensor_desc make_desc(dim_t n, dim_t c, dim_t h, dim_t w, layout preset,
        std::optional<tensor_desc::dims_t> custom_strides, data_type type) {
    if (n < 1 || c < 1 || h < 1 || w < 1)
        throw error(status::zero_extent, "tensor extents must be >= 1");
    if ((preset == layout::custom) != custom_strides.has_value())
        throw error(status::config_invalid,
                "custom strides must be given exactly when the layout is custom");

    tensor_desc d;
    d.dims_ = {n, c, h, w};
    d.type_ = type;
    switch (preset) {
        case layout::nchw: d.strides_ = {c * h * w, h * w, w, 1}; break;
        case layout::nhwc: d.strides_ = {h * w * c, 1, w * c, c}; break;
        case layout::custom: d.strides_ = *custom_strides; break;
    }
    if (!strides_injective(d.dims_, d.strides_))
        throw error(status::aliasing_strides, d.to_string() + " maps two coordinates to one offset");
    return d;
}

template <typename T>
void transform(cview<T> src, tensor_view<T> dst, std::type_identity_t<T> alpha,
        std::type_identity_t<T> beta) {
    if (!src.desc().same_extents(dst.desc()))
        throw error(status::shape_mismatch,
                "transform " + src.desc().to_string() + " -> " + dst.desc().to_string());
    if (views_overlap(src, dst))
        throw error(status::overlapping_buffers, "transform source and destination overlap");

    const tensor_desc &d = dst.desc();
    parallel_for(d.n() * d.c(), [&](dim_t begin, dim_t end) {
        for (dim_t nc = begin; nc < end; ++nc) {
            const dim_t n = nc / d.c(), c = nc % d.c();
            for (dim_t h = 0; h < d.h(); ++h)
                for (dim_t w = 0; w < d.w(); ++w) {
                    T &out = dst(n, c, h, w);
                    const T v = alpha * src(n, c, h, w);
                    out = beta == T(0) ? v : v + beta * out;
                }
        }
    });
}

template <typename T>
void add_broadcast(cview<T> bias, tensor_view<T> out, std::type_identity_t<T> alpha,
        std::type_identity_t<T> beta) {
    const auto &bd = bias.desc().dims();
    const auto &od = out.desc().dims();
    tensor_desc::dims_t bstride {};
    for (int i = 0; i < 4; ++i) {
        if (bd[i] != od[i] && bd[i] != 1)
            throw error(status::incompatible_broadcast,
                    bias.desc().to_string() + " cannot broadcast onto " + out.desc().to_string());
        // A broadcast dimension always reads coordinate 0.
        bstride[i] = bd[i] == 1 ? 0 : bias.desc().strides()[i];
    }
    if (views_overlap(bias, out))
        throw error(status::overlapping_buffers, "bias and output overlap");

    const tensor_desc &d = out.desc();
    const T *b = bias.base();
    parallel_for(d.n() * d.c(), [&](dim_t begin, dim_t end) {
        for (dim_t nc = begin; nc < end; ++nc) {
            const dim_t n = nc / d.c(), c = nc % d.c();
            for (dim_t h = 0; h < d.h(); ++h)
                for (dim_t w = 0; w < d.w(); ++w) {
                    const T v = alpha
                            * b[n * bstride[0] + c * bstride[1] + h * bstride[2] + w * bstride[3]];
                    T &o = out(n, c, h, w);
                    o = beta == T(0) ? v : v + beta * o;
                }
        }
    });
}

template void transform<float>(cview<float>, tensor_view<float>, float, float);
template void transform<double>(cview<double>, tensor_view<double>, double, double);
template void add_broadcast<float>(cview<float>, tensor_view<float>, float, float);
template void add_broadcast<double>(cview<double>, tensor_view<double>, double, double);

} // namespace dnnp
