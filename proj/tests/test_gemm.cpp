// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "dnnp/conv.hpp"
#include "dnnp/gemm.hpp"
#include "test_support.hpp"

using namespace dnnp;
using dnnp::testkit::status_of;

namespace {

template <typename T>
std::vector<T> random_matrix(dim_t rows, dim_t cols, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> d(-1, 1);
    std::vector<T> m(static_cast<std::size_t>(rows * cols));
    for (T &v : m)
        v = T(d(rng));
    return m;
}

// Triple loop in double.
template <typename T>
std::vector<double> naive_product(const std::vector<T> &a, const std::vector<T> &b, dim_t m,
        dim_t k, dim_t n) {
    std::vector<double> c(static_cast<std::size_t>(m * n), 0.0);
    for (dim_t i = 0; i < m; ++i)
        for (dim_t j = 0; j < n; ++j) {
            double s = 0;
            for (dim_t l = 0; l < k; ++l)
                s += double(a[i * k + l]) * double(b[l * n + j]);
            c[i * n + j] = s;
        }
    return c;
}

template <typename T>
std::vector<double> widen(const std::vector<T> &v) {
    return std::vector<double>(v.begin(), v.end());
}

template <typename T>
std::vector<T> run_gemm(const std::vector<T> &a, const std::vector<T> &b, dim_t m, dim_t k,
        dim_t n, tile_config cfg, T alpha = 1, execution exec = execution::parallel) {
    std::vector<T> c(static_cast<std::size_t>(m * n), T(0));
    gemm<T>(stored_matrix<const T>::row_major(a.data(), m, k),
            stored_matrix<const T>::row_major(b.data(), k, n),
            stored_matrix<T>::row_major(c.data(), m, n), alpha, T(0), cfg, exec);
    return c;
}

} // namespace

TEST(Gemm, OneByOne) {
    const std::vector<float> a {3}, b {-2};
    EXPECT_EQ(run_gemm(a, b, 1, 1, 1, {}), (std::vector<float> {-6}));
}

TEST(Gemm, IdentityLeavesOperand) {
    std::mt19937_64 rng(1);
    const dim_t n = 13;
    std::vector<double> eye(static_cast<std::size_t>(n * n), 0.0);
    for (dim_t i = 0; i < n; ++i)
        eye[i * n + i] = 1;
    const auto b = random_matrix<double>(n, 9, rng);
    EXPECT_EQ(run_gemm(eye, b, n, n, 9, {4, 4, 3}), b);
}

TEST(Gemm, MatchesNaiveWithRaggedTiles) {
    std::mt19937_64 rng(2);
    const auto a = random_matrix<float>(7, 9, rng);
    const auto b = random_matrix<float>(9, 5, rng);
    const auto c = run_gemm(a, b, 7, 9, 5, {4, 4, 3});
    EXPECT_LE(testkit::max_rel_error(widen(c), naive_product(a, b, 7, 9, 5)), 1e-6);
}

TEST(Gemm, RandomShapesMatchNaive) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<dim_t> ext(1, 40), tile(1, 17);
    for (int trial = 0; trial < 60; ++trial) {
        const dim_t m = ext(rng), k = ext(rng), n = ext(rng);
        const auto a = random_matrix<double>(m, k, rng);
        const auto b = random_matrix<double>(k, n, rng);
        const tile_config cfg {tile(rng), tile(rng), tile(rng)};
        const auto c = run_gemm(a, b, m, k, n, cfg);
        ASSERT_LE(testkit::max_rel_error(widen(c), naive_product(a, b, m, k, n)), 1e-13)
                << m << "x" << k << "x" << n;
    }
}

TEST(Gemm, ResultIndependentOfTilingAndThreads) {
    std::mt19937_64 rng(4);
    const dim_t m = 37, k = 53, n = 29;
    const auto a = random_matrix<float>(m, k, rng);
    const auto b = random_matrix<float>(k, n, rng);
    const auto ref = run_gemm(a, b, m, k, n, {1, 1, 1}, 1.f, execution::sequential);
    for (tile_config cfg : {tile_config {64, 64, 8}, tile_config {5, 7, 3}, tile_config {37, 1, 53},
                 tile_config {128, 128, 128}})
        for (execution ex : {execution::parallel, execution::sequential})
            EXPECT_EQ(run_gemm(a, b, m, k, n, cfg, 1.f, ex), ref);
}

TEST(Gemm, LinearInAlpha) {
    std::mt19937_64 rng(5);
    const auto a = random_matrix<double>(6, 11, rng);
    const auto b = random_matrix<double>(11, 8, rng);
    const auto one = run_gemm(a, b, 6, 11, 8, {4, 4, 4}, 1.0);
    const auto two = run_gemm(a, b, 6, 11, 8, {4, 4, 4}, 2.0);
    for (std::size_t i = 0; i < one.size(); ++i)
        EXPECT_EQ(two[i], 2 * one[i]);
}

TEST(Gemm, BetaAccumulatesAndZeroBetaIgnoresGarbage) {
    std::mt19937_64 rng(6);
    const auto a = random_matrix<double>(4, 3, rng);
    const auto b = random_matrix<double>(3, 5, rng);
    const auto ab = naive_product(a, b, 4, 3, 5);
    std::vector<double> c(20, 1.5);
    gemm<double>(stored_matrix<const double>::row_major(a.data(), 4, 3),
            stored_matrix<const double>::row_major(b.data(), 3, 5),
            stored_matrix<double>::row_major(c.data(), 4, 5), 1.0, 2.0);
    std::vector<double> expect(20);
    for (std::size_t i = 0; i < 20; ++i)
        expect[i] = ab[i] + 3.0;
    EXPECT_LE(testkit::max_rel_error(c, expect), 1e-14);

    std::fill(c.begin(), c.end(), std::numeric_limits<double>::quiet_NaN());
    gemm<double>(stored_matrix<const double>::row_major(a.data(), 4, 3),
            stored_matrix<const double>::row_major(b.data(), 3, 5),
            stored_matrix<double>::row_major(c.data(), 4, 5), 1.0, 0.0);
    EXPECT_LE(testkit::max_rel_error(c, ab), 1e-14);
}

TEST(Gemm, TransposedStoredOperand) {
    std::mt19937_64 rng(7);
    const auto at = random_matrix<double>(9, 6, rng); // A^T stored row-major
    const auto b = random_matrix<double>(9, 4, rng);
    std::vector<double> a(54);
    for (dim_t i = 0; i < 6; ++i)
        for (dim_t l = 0; l < 9; ++l)
            a[i * 9 + l] = at[l * 6 + i];
    std::vector<double> c(24);
    gemm<double>(stored_matrix<const double>::row_major(at.data(), 9, 6).transposed(),
            stored_matrix<const double>::row_major(b.data(), 9, 4),
            stored_matrix<double>::row_major(c.data(), 6, 4), 1.0, 0.0, {4, 3, 2});
    EXPECT_LE(testkit::max_rel_error(c, naive_product(a, b, 6, 9, 4)), 1e-14);
}

TEST(Gemm, VirtualOperandBitIdenticalToStored) {
    std::mt19937_64 rng(8);
    const dim_t m = 10, k = 14, n = 12;
    const auto a = random_matrix<float>(m, k, rng);
    const auto b = random_matrix<float>(k, n, rng);
    const auto stored = run_gemm(a, b, m, k, n, {4, 5, 3});
    auto vb = make_virtual_matrix<float>(k, n, [&](dim_t i, dim_t j) { return b[i * n + j]; });
    std::vector<float> c(static_cast<std::size_t>(m * n));
    gemm<float>(stored_matrix<const float>::row_major(a.data(), m, k), vb,
            stored_matrix<float>::row_major(c.data(), m, n), 1.f, 0.f, {4, 5, 3});
    EXPECT_EQ(c, stored);
}

TEST(Gemm, DimensionMismatch) {
    std::vector<float> a(6), b(8), c(8);
    EXPECT_EQ(status_of([&] {
        gemm<float>(stored_matrix<const float>::row_major(a.data(), 2, 3),
                stored_matrix<const float>::row_major(b.data(), 4, 2),
                stored_matrix<float>::row_major(c.data(), 2, 2), 1.f, 0.f);
    }),
            status::dim_mismatch);
    EXPECT_EQ(status_of([&] {
        gemm<float>(stored_matrix<const float>::row_major(a.data(), 2, 3),
                stored_matrix<const float>::row_major(b.data(), 3, 2),
                stored_matrix<float>::row_major(c.data(), 4, 2), 1.f, 0.f);
    }),
            status::dim_mismatch);
    EXPECT_EQ(status_of([&] {
        gemm<float>(stored_matrix<const float>::row_major(a.data(), 2, 3),
                stored_matrix<const float>::row_major(b.data(), 3, 2),
                stored_matrix<float>::row_major(c.data(), 2, 2), 1.f, 0.f, {0, 4, 4});
    }),
            status::config_invalid);
}

// The 3-channel, 3x3 image and two 2x2 filters: the product of the filter
// matrix with a virtual data matrix read from the image reproduces the
// convolution sum.
TEST(Gemm, VirtualLoweringReproducesSmallConvolution) {
    testkit::host_tensor<double> x(1, 3, 3, 3);
    testkit::host_filter<double> f(2, 3, 2, 2);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        x.data[i] = double(i % 7) - 2;
    for (std::size_t i = 0; i < f.data.size(); ++i)
        f.data[i] = double(i % 5) * 0.5 - 1;
    const conv_desc conv {};
    const auto expect = testkit::reference_conv(x, f, conv);

    const dim_t crs = 12, npq = 4;
    // Row (c, r, s), column (p, q) -> x(c, p + 1 - r, q + 1 - s).
    auto dm = make_virtual_matrix<double>(crs, npq, [&](dim_t i, dim_t j) {
        const dim_t c = i / 4, r = (i / 2) % 2, s = i % 2, p = j / 2, q = j % 2;
        return x(0, c, p + 1 - r, q + 1 - s);
    });
    std::vector<double> out(8);
    gemm<double>(stored_matrix<const double>::row_major(f.data.data(), 2, crs), dm,
            stored_matrix<double>::row_major(out.data(), 2, npq), 1.0, 0.0, {2, 3, 5});
    EXPECT_LE(testkit::max_rel_error(out, expect), 1e-15);
}
