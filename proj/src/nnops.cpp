// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dnnp/nnops.hpp"

#include <algorithm>
#include <cmath>

#include "dnnp/conv.hpp"

namespace dnnp {

namespace {

void check_same(const tensor_desc &a, const tensor_desc &b, const char *what) {
    if (!a.same_extents(b))
        throw error(status::shape_mismatch,
                std::string(what) + ": " + a.to_string() + " vs " + b.to_string());
}

// Visits each normalization group: fn(n, h0, h1, w0, w1) covers channels
// [0, C) over the spatial box [h0, h1) x [w0, w1) of image n.
template <typename Fn>
void for_each_group(softmax_mode mode, const tensor_desc &d, Fn &&fn) {
    if (mode == softmax_mode::per_image) {
        parallel_for(d.n(), [&](dim_t begin, dim_t end) {
            for (dim_t n = begin; n < end; ++n)
                fn(n, 0, d.h(), 0, d.w());
        });
    } else {
        parallel_for(d.n() * d.h(), [&](dim_t begin, dim_t end) {
            for (dim_t nh = begin; nh < end; ++nh) {
                const dim_t n = nh / d.h(), h = nh % d.h();
                for (dim_t w = 0; w < d.w(); ++w)
                    fn(n, h, h + 1, w, w + 1);
            }
        });
    }
}

template <typename Fn>
void for_each_in_group(const tensor_desc &d, dim_t h0, dim_t h1, dim_t w0, dim_t w1, Fn &&fn) {
    for (dim_t c = 0; c < d.c(); ++c)
        for (dim_t h = h0; h < h1; ++h)
            for (dim_t w = w0; w < w1; ++w)
                fn(c, h, w);
}

struct window {
    dim_t lo, hi; // in-image input range [lo, hi)
};

window clip_window(dim_t out, dim_t stride, dim_t pad, dim_t size, dim_t extent) {
    const dim_t start = out * stride - pad;
    return {std::max<dim_t>(start, 0), std::min(start + size, extent)};
}

} // namespace

template <typename T>
void activation_forward(activation_kind kind, cview<T> x, tensor_view<T> y) {
    check_same(x.desc(), y.desc(), "activation_forward");
    const tensor_desc &d = x.desc();
    parallel_for(d.n() * d.c(), [&](dim_t begin, dim_t end) {
        for (dim_t nc = begin; nc < end; ++nc) {
            const dim_t n = nc / d.c(), c = nc % d.c();
            for (dim_t h = 0; h < d.h(); ++h)
                for (dim_t w = 0; w < d.w(); ++w) {
                    const T v = x(n, c, h, w);
                    T out = v;
                    switch (kind) {
                        case activation_kind::sigmoid: out = T(1) / (T(1) + std::exp(-v)); break;
                        case activation_kind::relu: out = v > T(0) ? v : T(0); break;
                        case activation_kind::tanh: out = std::tanh(v); break;
                    }
                    y(n, c, h, w) = out;
                }
        }
    });
}

template <typename T>
void activation_backward(activation_kind kind, cview<T> y, cview<T> dy, tensor_view<T> dx) {
    check_same(y.desc(), dy.desc(), "activation_backward");
    check_same(y.desc(), dx.desc(), "activation_backward");
    const tensor_desc &d = y.desc();
    parallel_for(d.n() * d.c(), [&](dim_t begin, dim_t end) {
        for (dim_t nc = begin; nc < end; ++nc) {
            const dim_t n = nc / d.c(), c = nc % d.c();
            for (dim_t h = 0; h < d.h(); ++h)
                for (dim_t w = 0; w < d.w(); ++w) {
                    const T out = y(n, c, h, w);
                    T slope = T(0);
                    switch (kind) {
                        case activation_kind::sigmoid: slope = out * (T(1) - out); break;
                        case activation_kind::relu: slope = out > T(0) ? T(1) : T(0); break;
                        case activation_kind::tanh: slope = T(1) - out * out; break;
                    }
                    dx(n, c, h, w) = dy(n, c, h, w) * slope;
                }
        }
    });
}

template <typename T>
void softmax_forward(softmax_mode mode, cview<T> x, tensor_view<T> y) {
    check_same(x.desc(), y.desc(), "softmax_forward");
    const tensor_desc &d = x.desc();
    for_each_group(mode, d, [&](dim_t n, dim_t h0, dim_t h1, dim_t w0, dim_t w1) {
        T top = x(n, 0, h0, w0);
        for_each_in_group(d, h0, h1, w0, w1,
                [&](dim_t c, dim_t h, dim_t w) { top = std::max(top, x(n, c, h, w)); });
        T sum = 0;
        for_each_in_group(d, h0, h1, w0, w1, [&](dim_t c, dim_t h, dim_t w) {
            const T e = std::exp(x(n, c, h, w) - top);
            y(n, c, h, w) = e;
            sum += e;
        });
        const T inv = T(1) / sum;
        for_each_in_group(
                d, h0, h1, w0, w1, [&](dim_t c, dim_t h, dim_t w) { y(n, c, h, w) *= inv; });
    });
}

template <typename T>
void softmax_backward(softmax_mode mode, cview<T> y, cview<T> dy, tensor_view<T> dx) {
    check_same(y.desc(), dy.desc(), "softmax_backward");
    check_same(y.desc(), dx.desc(), "softmax_backward");
    const tensor_desc &d = y.desc();
    for_each_group(mode, d, [&](dim_t n, dim_t h0, dim_t h1, dim_t w0, dim_t w1) {
        T dot = 0;
        for_each_in_group(d, h0, h1, w0, w1,
                [&](dim_t c, dim_t h, dim_t w) { dot += dy(n, c, h, w) * y(n, c, h, w); });
        for_each_in_group(d, h0, h1, w0, w1, [&](dim_t c, dim_t h, dim_t w) {
            dx(n, c, h, w) = y(n, c, h, w) * (dy(n, c, h, w) - dot);
        });
    });
}

void pooling_desc::validate() const {
    if (window_h < 1 || window_w < 1 || stride_h < 1 || stride_w < 1 || pad_h < 0 || pad_w < 0)
        throw error(status::config_invalid, "pooling window and stride must be >= 1, pads >= 0");
}

tensor_desc pooling_output_desc(const tensor_desc &x, const pooling_desc &pd, layout preset) {
    pd.validate();
    return make_desc(x.n(), x.c(), output_extent(x.h(), pd.window_h, pd.stride_h, pd.pad_h),
            output_extent(x.w(), pd.window_w, pd.stride_w, pd.pad_w), preset, std::nullopt,
            x.type());
}

namespace {
void check_pooling(const pooling_desc &pd, const tensor_desc &x, const tensor_desc &y) {
    const tensor_desc expect = pooling_output_desc(x, pd);
    if (!expect.same_extents(y))
        throw error(status::shape_mismatch,
                "pooling output " + y.to_string() + " expected " + expect.to_string());
    for (dim_t p = 0; p < y.h(); ++p) {
        const window wh = clip_window(p, pd.stride_h, pd.pad_h, pd.window_h, x.h());
        if (wh.lo >= wh.hi) throw error(status::empty_window, "window row lies in padding");
    }
    for (dim_t q = 0; q < y.w(); ++q) {
        const window ww = clip_window(q, pd.stride_w, pd.pad_w, pd.window_w, x.w());
        if (ww.lo >= ww.hi) throw error(status::empty_window, "window column lies in padding");
    }
}
} // namespace

template <typename T>
void pool_forward(const pooling_desc &pd, cview<T> x, tensor_view<T> y, std::span<dim_t> argmax) {
    const tensor_desc &xd = x.desc(), &yd = y.desc();
    check_pooling(pd, xd, yd);
    const bool record = pd.kind == pooling_kind::max && !argmax.empty();
    if (record && static_cast<dim_t>(argmax.size()) < yd.element_count())
        throw error(status::out_of_bounds, "argmax buffer smaller than the pooling output");

    parallel_for(yd.n() * yd.c(), [&](dim_t begin, dim_t end) {
        for (dim_t nc = begin; nc < end; ++nc) {
            const dim_t n = nc / yd.c(), c = nc % yd.c();
            for (dim_t p = 0; p < yd.h(); ++p) {
                const window wh = clip_window(p, pd.stride_h, pd.pad_h, pd.window_h, xd.h());
                for (dim_t q = 0; q < yd.w(); ++q) {
                    const window ww = clip_window(q, pd.stride_w, pd.pad_w, pd.window_w, xd.w());
                    if (pd.kind == pooling_kind::max) {
                        T best = x(n, c, wh.lo, ww.lo);
                        dim_t where = wh.lo * xd.w() + ww.lo;
                        for (dim_t h = wh.lo; h < wh.hi; ++h)
                            for (dim_t w = ww.lo; w < ww.hi; ++w)
                                if (x(n, c, h, w) > best) {
                                    best = x(n, c, h, w);
                                    where = h * xd.w() + w;
                                }
                        y(n, c, p, q) = best;
                        if (record) argmax[static_cast<std::size_t>((nc * yd.h() + p) * yd.w() + q)] = where;
                    } else {
                        T sum = 0;
                        for (dim_t h = wh.lo; h < wh.hi; ++h)
                            for (dim_t w = ww.lo; w < ww.hi; ++w)
                                sum += x(n, c, h, w);
                        y(n, c, p, q) = sum / static_cast<T>((wh.hi - wh.lo) * (ww.hi - ww.lo));
                    }
                }
            }
        }
    });
}

template <typename T>
void pool_backward(const pooling_desc &pd, cview<T> y, cview<T> dy, cview<T> x, tensor_view<T> dx,
        std::span<const dim_t> argmax) {
    const tensor_desc &xd = x.desc(), &yd = y.desc();
    check_same(yd, dy.desc(), "pool_backward");
    check_same(xd, dx.desc(), "pool_backward");
    check_pooling(pd, xd, yd);
    if (pd.kind == pooling_kind::max) {
        if (argmax.empty()) throw error(status::missing_argmax, "max pooling backward needs argmax");
        if (static_cast<dim_t>(argmax.size()) < yd.element_count())
            throw error(status::out_of_bounds, "argmax buffer smaller than the pooling output");
    }

    parallel_for(xd.n() * xd.c(), [&](dim_t begin, dim_t end) {
        for (dim_t nc = begin; nc < end; ++nc) {
            const dim_t n = nc / xd.c(), c = nc % xd.c();
            for (dim_t h = 0; h < xd.h(); ++h)
                for (dim_t w = 0; w < xd.w(); ++w)
                    dx(n, c, h, w) = T(0);
            for (dim_t p = 0; p < yd.h(); ++p) {
                const window wh = clip_window(p, pd.stride_h, pd.pad_h, pd.window_h, xd.h());
                for (dim_t q = 0; q < yd.w(); ++q) {
                    const window ww = clip_window(q, pd.stride_w, pd.pad_w, pd.window_w, xd.w());
                    const T g = dy(n, c, p, q);
                    if (pd.kind == pooling_kind::max) {
                        const dim_t where
                                = argmax[static_cast<std::size_t>((nc * yd.h() + p) * yd.w() + q)];
                        const dim_t h = where / xd.w(), w = where % xd.w();
                        if (h < wh.lo || h >= wh.hi || w < ww.lo || w >= ww.hi)
                            throw error(status::out_of_bounds, "argmax entry outside its window");
                        dx(n, c, h, w) += g;
                    } else {
                        const T share
                                = g / static_cast<T>((wh.hi - wh.lo) * (ww.hi - ww.lo));
                        for (dim_t h = wh.lo; h < wh.hi; ++h)
                            for (dim_t w = ww.lo; w < ww.hi; ++w)
                                dx(n, c, h, w) += share;
                    }
                }
            }
        }
    });
}

#define DNNP_INSTANTIATE_NNOPS(T) \
    template void activation_forward<T>(activation_kind, cview<T>, tensor_view<T>); \
    template void activation_backward<T>(activation_kind, cview<T>, cview<T>, tensor_view<T>); \
    template void softmax_forward<T>(softmax_mode, cview<T>, tensor_view<T>); \
    template void softmax_backward<T>(softmax_mode, cview<T>, cview<T>, tensor_view<T>); \
    template void pool_forward<T>(const pooling_desc &, cview<T>, tensor_view<T>, std::span<dim_t>); \
    template void pool_backward<T>(const pooling_desc &, cview<T>, cview<T>, cview<T>, \
            tensor_view<T>, std::span<const dim_t>);

DNNP_INSTANTIATE_NNOPS(float)
DNNP_INSTANTIATE_NNOPS(double)

} // namespace dnnp
