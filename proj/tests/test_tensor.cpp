// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <unordered_set>

#include "dnnp/tensor.hpp"
#include "test_support.hpp"

using namespace dnnp;
using dnnp::testkit::host_tensor;
using dnnp::testkit::status_of;

TEST(TensorDesc, SingletonNchw) {
    const auto d = make_desc(1, 1, 1, 1);
    EXPECT_EQ(d.strides(), (tensor_desc::dims_t {1, 1, 1, 1}));
}

TEST(TensorDesc, PresetStrides) {
    EXPECT_EQ(make_desc(2, 3, 4, 5, layout::nchw).strides(), (tensor_desc::dims_t {60, 20, 5, 1}));
    EXPECT_EQ(make_desc(2, 3, 4, 5, layout::nhwc).strides(), (tensor_desc::dims_t {60, 1, 15, 3}));
}

TEST(TensorDesc, Errors) {
    EXPECT_EQ(status_of([] { make_desc(0, 1, 1, 1); }), status::zero_extent);
    EXPECT_EQ(status_of([] { make_desc(1, 2, 1, 1, layout::custom, tensor_desc::dims_t {1, 0, 1, 1}); }),
            status::aliasing_strides);
    // w and h both step by 1 over a 2x2 plane.
    EXPECT_EQ(status_of([] { make_desc(1, 1, 2, 2, layout::custom, tensor_desc::dims_t {4, 4, 1, 1}); }),
            status::aliasing_strides);
    EXPECT_EQ(status_of([] { make_desc(1, 1, 2, 2, layout::nchw, tensor_desc::dims_t {4, 4, 2, 1}); }),
            status::config_invalid);
    EXPECT_EQ(status_of([] { make_desc(1, 1, 2, 2, layout::custom); }), status::config_invalid);
}

TEST(TensorDesc, NonNestedButInjectiveStridesAccepted) {
    // Offsets 0,2,3,5 for w in {0,1}, h in {0,1} with strides (3, 2): distinct.
    EXPECT_NO_THROW(make_desc(1, 1, 2, 2, layout::custom, tensor_desc::dims_t {6, 6, 3, 2}));
    // h stride 2, w stride 3 on a 3x3 plane: offsets 0,3,6,2,5,8,4,7,10 are distinct.
    EXPECT_TRUE(strides_injective({1, 1, 3, 3}, {11, 11, 2, 3}));
    // Same strides on a 4x3 plane: (h=0, w=2) and (h=3, w=0) both land on 6.
    EXPECT_FALSE(strides_injective({1, 1, 4, 3}, {12, 12, 2, 3}));
}

TEST(TensorDesc, NegativeStrides) {
    const auto d = make_desc(1, 1, 2, 3, layout::custom, tensor_desc::dims_t {6, 6, -3, 1});
    EXPECT_EQ(d.min_offset(), -3);
    EXPECT_EQ(d.max_offset(), 2);
    std::vector<float> buf {1, 2, 3, 4, 5, 6};
    // Row 0 lives at the end of the buffer, row 1 at the start.
    tensor_view<float> v(d, std::span<float>(buf), 3);
    EXPECT_EQ(v(0, 0, 0, 0), 4.f);
    EXPECT_EQ(v(0, 0, 1, 2), 3.f);
    EXPECT_EQ(status_of([&] { tensor_view<float>(d, std::span<float>(buf), 0); }),
            status::out_of_bounds);
}

TEST(TensorDesc, ViewTypeChecked) {
    std::vector<double> buf(4);
    EXPECT_EQ(status_of([&] { tensor_view<double>(make_desc(1, 1, 2, 2), std::span<double>(buf)); }),
            status::type_mismatch);
}

TEST(TensorDesc, PresetsInjectiveOnRandomShapes) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<dim_t> ext(1, 7);
    for (int trial = 0; trial < 200; ++trial) {
        const dim_t n = ext(rng), c = ext(rng), h = ext(rng), w = ext(rng);
        for (layout l : {layout::nchw, layout::nhwc}) {
            const auto d = make_desc(n, c, h, w, l);
            std::unordered_set<dim_t> seen;
            for_each_coord(d, [&](dim_t a, dim_t b, dim_t cc, dim_t dd) {
                seen.insert(d.offset(a, b, cc, dd));
            });
            ASSERT_EQ(static_cast<dim_t>(seen.size()), d.element_count());
        }
    }
}

TEST(Transform, ScalesElementwise) {
    host_tensor<float> src(1, 1, 2, 2), dst(1, 1, 2, 2);
    src.data = {1, 2, 3, 4};
    transform<float>(src.cview(), dst.view(), 2.f, 0.f);
    EXPECT_EQ(dst.data, (std::vector<float> {2, 4, 6, 8}));
}

TEST(Transform, AlphaZeroBetaOneLeavesDst) {
    host_tensor<double> src(1, 2, 2, 2), dst(1, 2, 2, 2);
    std::mt19937_64 rng(3);
    dnnp::testkit::fill_uniform(src, rng);
    dnnp::testkit::fill_uniform(dst, rng);
    const auto before = dst.data;
    transform<double>(src.cview(), dst.view(), 0.0, 1.0);
    EXPECT_EQ(dst.data, before);
}

TEST(Transform, LayoutRoundTripIsIdentity) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<dim_t> ext(1, 6);
        host_tensor<float> a(ext(rng), ext(rng), ext(rng), ext(rng), layout::nchw);
        dnnp::testkit::fill_uniform(a, rng);
        host_tensor<float> b(a.desc.n(), a.desc.c(), a.desc.h(), a.desc.w(), layout::nhwc);
        host_tensor<float> back(a.desc.n(), a.desc.c(), a.desc.h(), a.desc.w(), layout::nchw);
        transform<float>(a.cview(), b.view(), 1.f, 0.f);
        transform<float>(b.cview(), back.view(), 1.f, 0.f);
        ASSERT_EQ(back.data, a.data);
        ASSERT_EQ(b.logical(), a.logical());
    }
}

TEST(Transform, Errors) {
    host_tensor<float> a(1, 1, 2, 2), b(1, 1, 2, 3);
    EXPECT_EQ(status_of([&] { transform<float>(a.cview(), b.view(), 1.f, 0.f); }),
            status::shape_mismatch);
    EXPECT_EQ(status_of([&] { transform<float>(a.cview(), a.view(), 1.f, 0.f); }),
            status::overlapping_buffers);
}

TEST(AddBroadcast, PerChannelBias) {
    host_tensor<float> bias(1, 2, 1, 1), out(1, 2, 2, 2);
    bias.data = {10, 20};
    add_broadcast<float>(bias.cview(), out.view(), 1.f, 1.f);
    EXPECT_EQ(out.data, (std::vector<float> {10, 10, 10, 10, 20, 20, 20, 20}));
}

TEST(AddBroadcast, PerChannelOnLargerTensor) {
    std::mt19937_64 rng(5);
    host_tensor<double> bias(1, 3, 1, 1), out(2, 3, 4, 5, layout::nhwc);
    dnnp::testkit::fill_uniform(bias, rng);
    add_broadcast<double>(bias.cview(), out.view(), 0.5, 0.0);
    for_each_coord(out.desc, [&](dim_t n, dim_t c, dim_t h, dim_t w) {
        EXPECT_EQ(out(n, c, h, w), 0.5 * bias(0, c, 0, 0));
    });
}

TEST(AddBroadcast, FullShapeIsElementwiseSum) {
    std::mt19937_64 rng(9);
    host_tensor<double> a(2, 2, 3, 3), b(2, 2, 3, 3);
    dnnp::testkit::fill_uniform(a, rng);
    dnnp::testkit::fill_uniform(b, rng);
    const auto expect = [&] {
        std::vector<double> s(a.data.size());
        for (std::size_t i = 0; i < s.size(); ++i)
            s[i] = a.data[i] + b.data[i];
        return s;
    }();
    add_broadcast<double>(a.cview(), b.view(), 1.0, 1.0);
    EXPECT_EQ(b.data, expect);
}

TEST(AddBroadcast, ZeroBiasIsIdentity) {
    std::mt19937_64 rng(13);
    host_tensor<float> bias(1, 4, 1, 3), out(3, 4, 2, 3);
    dnnp::testkit::fill_uniform(out, rng);
    const auto before = out.data;
    add_broadcast<float>(bias.cview(), out.view(), 1.f, 1.f);
    EXPECT_EQ(out.data, before);
}

TEST(AddBroadcast, IncompatibleShape) {
    host_tensor<float> bias(1, 3, 1, 1), out(1, 2, 2, 2);
    EXPECT_EQ(status_of([&] { add_broadcast<float>(bias.cview(), out.view(), 1.f, 1.f); }),
            status::incompatible_broadcast);
}
