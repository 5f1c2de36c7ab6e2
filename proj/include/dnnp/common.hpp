// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DNNP_COMMON_HPP
#define DNNP_COMMON_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <new>
#include <string>
#include <vector>

namespace dnnp {

using dim_t = std::int64_t;

enum class status {
    success = 0,
    zero_extent,
    aliasing_strides,
    out_of_bounds,
    type_mismatch,
    shape_mismatch,
    overlapping_buffers,
    incompatible_broadcast,
    zero_divisor,
    dim_mismatch,
    empty_output,
    alloc_too_large,
    empty_window,
    missing_argmax,
    parse_error,
    config_invalid,
    verify_failed,
};

const char *status_name(status s);

/// Library exception. Every failed precondition surfaces as one of these,
/// carrying a status code and a human-readable message.
class error : public std::exception {
public:
    error(status s, std::string message)
        : status_(s), message_(std::string(status_name(s)) + ": " + std::move(message)) {}

    status code() const noexcept { return status_; }
    const char *what() const noexcept override { return message_.c_str(); }

private:
    status status_;
    std::string message_;
};

enum class data_type { f32, f64 };

template <typename T>
struct data_type_of;
template <>
struct data_type_of<float> { static constexpr data_type value = data_type::f32; };
template <>
struct data_type_of<double> { static constexpr data_type value = data_type::f64; };
template <typename T>
struct data_type_of<const T> : data_type_of<T> {};

template <typename T>
inline constexpr data_type data_type_v = data_type_of<T>::value;

const char *data_type_name(data_type dt);
std::size_t data_type_size(data_type dt);

// ---------------------------------------------------------------------------
// Threading. Work is split over std::threads; the count is process-wide.

void set_num_threads(int n);
int num_threads();

/// Runs fn(begin, end) over a partition of [0, count) using up to
/// num_threads() workers. fn must be safe to call concurrently on disjoint
/// ranges. Exceptions from workers are rethrown on the caller.
void parallel_for(dim_t count, const std::function<void(dim_t, dim_t)> &fn);

// ---------------------------------------------------------------------------
// Scratch allocation tracking. Every transient buffer the engines allocate
// goes through scratch_allocator, so tests can bound auxiliary memory.

namespace scratch_stats {
/// Bytes currently held in scratch buffers.
std::size_t current_bytes();
/// High-water mark since the last reset().
std::size_t peak_bytes();
/// Largest single scratch allocation since the last reset().
std::size_t largest_allocation();
void reset();

void on_allocate(std::size_t bytes);
void on_deallocate(std::size_t bytes);
} // namespace scratch_stats

template <typename T>
struct scratch_allocator {
    using value_type = T;

    scratch_allocator() = default;
    template <typename U>
    scratch_allocator(const scratch_allocator<U> &) noexcept {}

    T *allocate(std::size_t n) {
        if (n > std::numeric_limits<std::size_t>::max() / sizeof(T)) throw std::bad_alloc();
        T *p = static_cast<T *>(::operator new(n * sizeof(T), std::align_val_t {64}));
        scratch_stats::on_allocate(n * sizeof(T));
        return p;
    }
    void deallocate(T *p, std::size_t n) noexcept {
        scratch_stats::on_deallocate(n * sizeof(T));
        ::operator delete(p, std::align_val_t {64});
    }

    template <typename U>
    bool operator==(const scratch_allocator<U> &) const noexcept { return true; }
};

template <typename T>
using scratch_vector = std::vector<T, scratch_allocator<T>>;

} // namespace dnnp

#endif
