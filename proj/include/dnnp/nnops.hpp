// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DNNP_NNOPS_HPP
#define DNNP_NNOPS_HPP

#include <span>

#include "dnnp/common.hpp"
#include "dnnp/tensor.hpp"

namespace dnnp {

enum class activation_kind { sigmoid, relu, tanh };

/// y = act(x) elementwise. x and y may be the same view.
template <typename T>
void activation_forward(activation_kind kind, cview<T> x, tensor_view<T> y);

/// dx = dy * act'(x), with the derivative expressed through the forward
/// output y: sigmoid y(1 - y), relu [y > 0], tanh 1 - y^2.
template <typename T>
void activation_backward(activation_kind kind, cview<T> y, cview<T> dy, tensor_view<T> dx);

enum class softmax_mode {
    per_image, ///< normalize over C*H*W for each image
    per_spatial, ///< normalize over C at each (n, h, w)
};

/// Max-subtracted softmax over each normalization group.
template <typename T>
void softmax_forward(softmax_mode mode, cview<T> x, tensor_view<T> y);

/// dx_i = y_i * (dy_i - sum_j dy_j y_j) per group.
template <typename T>
void softmax_backward(softmax_mode mode, cview<T> y, cview<T> dy, tensor_view<T> dx);

enum class pooling_kind { max, average };

struct pooling_desc {
    pooling_kind kind = pooling_kind::max;
    dim_t window_h = 2, window_w = 2;
    dim_t stride_h = 2, stride_w = 2;
    dim_t pad_h = 0, pad_w = 0;

    void validate() const;
};

/// Output descriptor: each spatial extent follows the convolution output
/// formula with (filter, stride, pad) := (window, stride, pad).
tensor_desc pooling_output_desc(const tensor_desc &x, const pooling_desc &pd,
        layout preset = layout::nchw);

/// Max pooling takes the largest in-image element of each window; average
/// pooling divides by the number of in-image elements (padding is not
/// counted). For max pooling, argmax (when non-empty, one entry per output
/// element in dense NCHW order) receives h * W + w of the first maximum in
/// row-major scan order.
template <typename T>
void pool_forward(const pooling_desc &pd, cview<T> x, tensor_view<T> y,
        std::span<dim_t> argmax = {});

/// Overwrites dx. Max pooling routes each dy to its recorded argmax and
/// requires the argmax buffer from pool_forward; average pooling spreads
/// dy / count over the in-image window.
template <typename T>
void pool_backward(const pooling_desc &pd, cview<T> y, cview<T> dy, cview<T> x,
        tensor_view<T> dx, std::span<const dim_t> argmax = {});

} // namespace dnnp

#endif
