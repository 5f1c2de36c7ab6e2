// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dnnp/intdiv.hpp"

#include <bit>

namespace dnnp {

// Magic number search for unsigned division (Warren, Hacker's Delight,
// "magicu"). Runs once per divisor; hardware division is fine here.
magic_divider::magic_divider(std::uint32_t d) : divisor_(d) {
    if (d == 0) throw error(status::zero_divisor, "divisor must be positive");

    if (std::has_single_bit(d)) {
        multiplier_ = 0;
        shift_ = std::countr_zero(d);
        add_ = false;
        return;
    }

    const std::uint32_t nc = static_cast<std::uint32_t>(-1) - (0u - d) % d;
    int p = 31;
    std::uint32_t q1 = 0x80000000u / nc;
    std::uint32_t r1 = 0x80000000u - q1 * nc;
    std::uint32_t q2 = 0x7FFFFFFFu / d;
    std::uint32_t r2 = 0x7FFFFFFFu - q2 * d;
    std::uint32_t delta = 0;
    bool add = false;
    do {
        ++p;
        if (r1 >= nc - r1) {
            q1 = 2 * q1 + 1;
            r1 = 2 * r1 - nc;
        } else {
            q1 = 2 * q1;
            r1 = 2 * r1;
        }
        if (r2 + 1 >= d - r2) {
            if (q2 >= 0x7FFFFFFFu) add = true;
            q2 = 2 * q2 + 1;
            r2 = 2 * r2 + 1 - d;
        } else {
            if (q2 >= 0x80000000u) add = true;
            q2 = 2 * q2;
            r2 = 2 * r2 + 1;
        }
        delta = d - 1 - r2;
    } while (p < 64 && (q1 < delta || (q1 == delta && r1 == 0)));

    multiplier_ = q2 + 1;
    shift_ = p - 32;
    add_ = add;
}

} // namespace dnnp
