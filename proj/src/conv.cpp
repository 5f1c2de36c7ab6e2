// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include <limits>

#include "conv_internal.hpp"

namespace dnnp {

filter_desc make_filter_desc(dim_t k, dim_t c, dim_t r, dim_t s, data_type type) {
    if (k < 1 || c < 1 || r < 1 || s < 1)
        throw error(status::zero_extent, "filter extents must be >= 1");
    return {k, c, r, s, type};
}

void conv_desc::validate() const {
    if (u < 1 || v < 1) throw error(status::config_invalid, "convolution strides must be >= 1");
    if (pad_h < 0 || pad_w < 0) throw error(status::config_invalid, "padding must be >= 0");
}

std::pair<dim_t, dim_t> preset_padding(pad_preset preset, dim_t r, dim_t s) {
    switch (preset) {
        case pad_preset::valid: return {0, 0};
        case pad_preset::same: return {r / 2, s / 2};
        case pad_preset::full: return {r - 1, s - 1};
    }
    return {0, 0};
}

const char *engine_name(engine e) {
    switch (e) {
        case engine::direct: return "direct";
        case engine::explicit_lowering: return "explicit";
        case engine::implicit_gemm: return "implicit";
    }
    return "unknown";
}

dim_t output_extent(dim_t in, dim_t filter, dim_t stride, dim_t pad) {
    if (in < 1 || filter < 1 || stride < 1 || pad < 0)
        throw error(status::config_invalid, "output_extent needs in, filter, stride >= 1, pad >= 0");
    const dim_t span = in - filter + 1 + 2 * pad;
    if (span < 1)
        throw error(status::empty_output,
                "filter " + std::to_string(filter) + " does not fit input " + std::to_string(in)
                        + " with padding " + std::to_string(pad));
    return (span + stride - 1) / stride;
}

conv_shape make_conv_shape(const tensor_desc &x, const filter_desc &f, const conv_desc &conv) {
    conv.validate();
    if (f.k < 1 || f.c < 1 || f.r < 1 || f.s < 1)
        throw error(status::zero_extent, "filter extents must be >= 1");
    if (x.type() != f.type) throw error(status::type_mismatch, "input and filter types differ");
    if (x.c() != f.c)
        throw error(status::shape_mismatch,
                "input has " + std::to_string(x.c()) + " channels, filter expects "
                        + std::to_string(f.c));
    conv_shape sh {x.n(), x.c(), x.h(), x.w(), f.k, f.r, f.s,
            output_extent(x.h(), f.r, conv.u, conv.pad_h), output_extent(x.w(), f.s, conv.v, conv.pad_w),
            conv.u, conv.v, conv.pad_h, conv.pad_w, conv.mode};
    constexpr dim_t index_limit = std::numeric_limits<std::uint32_t>::max();
    if (sh.crs() > index_limit || sh.npq() > index_limit)
        throw error(status::config_invalid, "lowered index space exceeds 32 bits");
    return sh;
}

tensor_desc conv_output_desc(
        const tensor_desc &x, const filter_desc &f, const conv_desc &conv, layout preset) {
    const conv_shape sh = make_conv_shape(x, f, conv);
    return make_desc(sh.n, sh.k, sh.p, sh.q, preset, std::nullopt, x.type());
}

lowering_index::lowering_index(const conv_shape &shape)
    : by_rs(static_cast<std::uint32_t>(shape.rs()))
    , by_s(static_cast<std::uint32_t>(shape.s))
    , by_pq(static_cast<std::uint32_t>(shape.pq()))
    , by_q(static_cast<std::uint32_t>(shape.q)) {}

namespace detail {
void check_forward(const conv_shape &sh, const tensor_desc &y) {
    if (y.n() != sh.n || y.c() != sh.k || y.h() != sh.p || y.w() != sh.q)
        throw error(status::shape_mismatch,
                "output " + y.to_string() + " expected [" + std::to_string(sh.n) + ","
                        + std::to_string(sh.k) + "," + std::to_string(sh.p) + ","
                        + std::to_string(sh.q) + "]");
}
} // namespace detail

namespace {
void check_filter_type(const filter_desc &f, const tensor_desc &t) {
    if (f.type != t.type()) throw error(status::type_mismatch, "filter and tensor types differ");
}
} // namespace

template <typename T>
void conv_forward(cview<T> x, cfilter<T> f, const conv_desc &conv, engine eng, tensor_view<T> y,
        std::type_identity_t<T> alpha, std::type_identity_t<T> beta, const conv_options &opts) {
    const conv_shape sh = make_conv_shape(x.desc(), f.desc(), conv);
    detail::check_forward(sh, y.desc());
    if (conv.accumulate) beta = T(1);
    switch (eng) {
        case engine::direct: detail::direct_forward<T>(x, f, sh, y, alpha, beta); break;
        case engine::explicit_lowering:
            detail::explicit_forward<T>(x, f, sh, conv, y, alpha, beta, opts);
            break;
        case engine::implicit_gemm:
            detail::implicit_forward<T>(x, f, sh, y, alpha, beta, opts);
            break;
    }
}

template <typename T>
void conv_backward_data(cview<T> dy, cfilter<T> f, const conv_desc &conv, engine eng,
        tensor_view<T> dx, const conv_options &opts) {
    check_filter_type(f.desc(), dy.desc());
    const conv_shape sh = make_conv_shape(dx.desc(), f.desc(), conv);
    detail::check_forward(sh, dy.desc());
    switch (eng) {
        case engine::direct:
            detail::direct_backward_data<T>(dy, f, sh, dx, conv.accumulate);
            break;
        case engine::explicit_lowering:
            detail::explicit_backward_data<T>(dy, f, sh, dx, conv.accumulate, opts);
            break;
        case engine::implicit_gemm:
            detail::implicit_backward_data<T>(dy, f, sh, dx, conv.accumulate, opts);
            break;
    }
}

template <typename T>
void conv_backward_filter(cview<T> dy, cview<T> x, const conv_desc &conv, engine eng,
        filter_view<T> df, const conv_options &opts) {
    check_filter_type(df.desc(), dy.desc());
    const conv_shape sh = make_conv_shape(x.desc(), df.desc(), conv);
    detail::check_forward(sh, dy.desc());
    switch (eng) {
        case engine::direct:
            detail::direct_backward_filter<T>(dy, x, sh, df, conv.accumulate);
            break;
        case engine::explicit_lowering:
            detail::explicit_backward_filter<T>(dy, x, sh, conv, df, conv.accumulate, opts);
            break;
        case engine::implicit_gemm:
            detail::implicit_backward_filter<T>(dy, x, sh, df, conv.accumulate, opts);
            break;
    }
}

template <typename T>
void conv_backward_bias(cview<T> dy, tensor_view<T> db, bool accumulate) {
    const tensor_desc &d = dy.desc();
    const tensor_desc &b = db.desc();
    if (b.n() != 1 || b.c() != d.c() || b.h() != 1 || b.w() != 1)
        throw error(status::shape_mismatch,
                "bias gradient " + b.to_string() + " must be [1," + std::to_string(d.c()) + ",1,1]");
    parallel_for(d.c(), [&](dim_t begin, dim_t end) {
        for (dim_t k = begin; k < end; ++k) {
            T sum = 0;
            for (dim_t n = 0; n < d.n(); ++n)
                for (dim_t p = 0; p < d.h(); ++p)
                    for (dim_t q = 0; q < d.w(); ++q)
                        sum += dy(n, k, p, q);
            T &out = db(0, k, 0, 0);
            out = accumulate ? out + sum : sum;
        }
    });
}

#define DNNP_INSTANTIATE_CONV(T) \
    template void conv_forward<T>(cview<T>, cfilter<T>, const conv_desc &, engine, \
            tensor_view<T>, T, T, const conv_options &); \
    template void conv_backward_data<T>(cview<T>, cfilter<T>, const conv_desc &, engine, \
            tensor_view<T>, const conv_options &); \
    template void conv_backward_filter<T>(cview<T>, cview<T>, const conv_desc &, engine, \
            filter_view<T>, const conv_options &); \
    template void conv_backward_bias<T>(cview<T>, tensor_view<T>, bool);

DNNP_INSTANTIATE_CONV(float)
DNNP_INSTANTIATE_CONV(double)

} // namespace dnnp
