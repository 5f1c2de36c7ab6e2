// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdint>
#include <limits>
#include <random>

#include "dnnp/intdiv.hpp"
#include "test_support.hpp"

using namespace dnnp;
using dnnp::testkit::status_of;

namespace {

constexpr std::uint32_t u32_max = std::numeric_limits<std::uint32_t>::max();

void expect_matches_hardware(std::uint32_t d, std::uint32_t n) {
    const auto md = make_divider(d);
    const auto r = div_mod(md, n);
    ASSERT_EQ(r.quot, n / d) << "n=" << n << " d=" << d;
    ASSERT_EQ(r.rem, n % d) << "n=" << n << " d=" << d;
}

} // namespace

TEST(MagicDivider, Examples) {
    EXPECT_EQ(div_mod(make_divider(3), 0), (div_mod_result {0, 0}));
    EXPECT_EQ(div_mod(make_divider(3), 10), (div_mod_result {3, 1}));
    EXPECT_EQ(div_mod(make_divider(12), 11), (div_mod_result {0, 11}));
}

TEST(MagicDivider, ZeroDivisorRejected) {
    EXPECT_EQ(status_of([] { make_divider(0); }), status::zero_divisor);
}

TEST(MagicDivider, DivisorOneIsIdentity) {
    const auto md = make_divider(1);
    for (std::uint32_t n : {0u, 1u, 2u, 12345u, u32_max - 1, u32_max})
        EXPECT_EQ(md.div_mod(n), (div_mod_result {n, 0}));
}

TEST(MagicDivider, SmallDivisorsExhaustiveLowRange) {
    for (std::uint32_t d : {1u, 2u, 3u, 7u})
        for (std::uint32_t n = 0; n < (1u << 20); ++n)
            expect_matches_hardware(d, n);
}

TEST(MagicDivider, AddFormDivisorSeen) {
    // 7 needs a 33-bit magic number in the classic construction.
    EXPECT_TRUE(make_divider(7).add_indicator());
    EXPECT_FALSE(make_divider(3).add_indicator());
    EXPECT_EQ(make_divider(64).multiplier(), 0u);
}

TEST(MagicDivider, BoundaryNumerators) {
    std::vector<std::uint32_t> divisors;
    for (std::uint32_t d = 1; d <= 300; ++d)
        divisors.push_back(d);
    for (std::uint32_t d : {641u, 1000u, 1u << 16, (1u << 16) + 1, 1u << 31, (1u << 31) + 1,
                 u32_max - 1, u32_max})
        divisors.push_back(d);
    for (std::uint32_t d : divisors) {
        for (std::uint32_t n : {0u, 1u, d - 1, d, d + 1, 2 * d - 1, u32_max - 1, u32_max})
            expect_matches_hardware(d, n);
        // Multiples of d and their neighbours near the top of the range.
        const std::uint32_t top = u32_max - u32_max % d;
        for (std::uint32_t n : {top, top - 1, top - d, top - d + 1})
            expect_matches_hardware(d, n);
    }
}

TEST(MagicDivider, RandomReconstruction) {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::uint32_t> any(0, u32_max);
    for (int i = 0; i < 20000; ++i) {
        const std::uint32_t d = std::max<std::uint32_t>(1, any(rng) >> (any(rng) % 32));
        const std::uint32_t n = any(rng);
        const auto [q, r] = div_mod(make_divider(d), n);
        ASSERT_LT(r, d);
        ASSERT_EQ(static_cast<std::uint64_t>(q) * d + r, n);
    }
}
