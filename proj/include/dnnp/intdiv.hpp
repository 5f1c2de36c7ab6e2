// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DNNP_INTDIV_HPP
#define DNNP_INTDIV_HPP

#include <cstdint>

#include "dnnp/common.hpp"

namespace dnnp {

struct div_mod_result {
    std::uint32_t quot;
    std::uint32_t rem;

    bool operator==(const div_mod_result &) const = default;
};

/// Exact unsigned 32-bit division by a divisor fixed at construction,
/// computed with one high multiply and shifts.
///
/// Three encodings are used:
///  - multiplier == 0: power-of-two divisor, q = n >> shift
///  - add == false:    q = mulhi(M, n) >> shift
///  - add == true:     t = mulhi(M, n); q = (t + ((n - t) >> 1)) >> (shift - 1)
/// The add form covers divisors whose exact magic number needs 33 bits.
class magic_divider {
public:
    /// Throws status::zero_divisor for d == 0.
    explicit magic_divider(std::uint32_t d);
    magic_divider() : magic_divider(1) {}

    std::uint32_t divisor() const { return divisor_; }
    std::uint32_t multiplier() const { return multiplier_; }
    int shift() const { return shift_; }
    bool add_indicator() const { return add_; }

    std::uint32_t quotient(std::uint32_t n) const {
        if (multiplier_ == 0) return n >> shift_;
        const auto t = static_cast<std::uint32_t>(
                (static_cast<std::uint64_t>(multiplier_) * n) >> 32);
        if (!add_) return t >> shift_;
        return (t + ((n - t) >> 1)) >> (shift_ - 1);
    }

    std::uint32_t remainder(std::uint32_t n) const { return n - quotient(n) * divisor_; }

    div_mod_result div_mod(std::uint32_t n) const {
        const std::uint32_t q = quotient(n);
        return {q, n - q * divisor_};
    }

private:
    std::uint32_t divisor_ = 1;
    std::uint32_t multiplier_ = 0;
    int shift_ = 0;
    bool add_ = false;
};

inline magic_divider make_divider(std::uint32_t d) { return magic_divider(d); }

inline div_mod_result div_mod(const magic_divider &md, std::uint32_t n) { return md.div_mod(n); }

} // namespace dnnp

#endif
