// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dnnp/common.hpp"

#include <algorithm>
#include <mutex>
#include <thread>

namespace dnnp {

const char *status_name(status s) {
    switch (s) {
        case status::success: return "success";
        case status::zero_extent: return "zero_extent";
        case status::aliasing_strides: return "aliasing_strides";
        case status::out_of_bounds: return "out_of_bounds";
        case status::type_mismatch: return "type_mismatch";
        case status::shape_mismatch: return "shape_mismatch";
        case status::overlapping_buffers: return "overlapping_buffers";
        case status::incompatible_broadcast: return "incompatible_broadcast";
        case status::zero_divisor: return "zero_divisor";
        case status::dim_mismatch: return "dim_mismatch";
        case status::empty_output: return "empty_output";
        case status::alloc_too_large: return "alloc_too_large";
        case status::empty_window: return "empty_window";
        case status::missing_argmax: return "missing_argmax";
        case status::parse_error: return "parse_error";
        case status::config_invalid: return "config_invalid";
        case status::verify_failed: return "verify_failed";
    }
    return "unknown";
}

const char *data_type_name(data_type dt) {
    return dt == data_type::f32 ? "f32" : "f64";
}

std::size_t data_type_size(data_type dt) {
    return dt == data_type::f32 ? sizeof(float) : sizeof(double);
}

namespace {
std::atomic<int> g_num_threads {
        static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
} // namespace

void set_num_threads(int n) { g_num_threads.store(std::max(1, n)); }

int num_threads() { return g_num_threads.load(); }

void parallel_for(dim_t count, const std::function<void(dim_t, dim_t)> &fn) {
    if (count <= 0) return;
    const dim_t workers = std::min<dim_t>(num_threads(), count);
    if (workers <= 1) {
        fn(0, count);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&](dim_t begin, dim_t end) {
        try {
            fn(begin, end);
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    const dim_t chunk = count / workers;
    const dim_t rem = count % workers;
    dim_t begin = 0;
    for (dim_t t = 0; t < workers; ++t) {
        const dim_t end = begin + chunk + (t < rem ? 1 : 0);
        if (t + 1 == workers)
            run(begin, end);
        else
            pool.emplace_back(run, begin, end);
        begin = end;
    }
    for (auto &th : pool)
        th.join();
    if (failure) std::rethrow_exception(failure);
}

namespace scratch_stats {
namespace {
std::atomic<std::size_t> g_current {0};
std::atomic<std::size_t> g_peak {0};
std::atomic<std::size_t> g_largest {0};

void raise_to(std::atomic<std::size_t> &target, std::size_t value) {
    std::size_t seen = target.load();
    while (seen < value && !target.compare_exchange_weak(seen, value)) {}
}
} // namespace

std::size_t current_bytes() { return g_current.load(); }
std::size_t peak_bytes() { return g_peak.load(); }
std::size_t largest_allocation() { return g_largest.load(); }

void reset() {
    g_peak.store(g_current.load());
    g_largest.store(0);
}

void on_allocate(std::size_t bytes) {
    const std::size_t now = g_current.fetch_add(bytes) + bytes;
    raise_to(g_peak, now);
    raise_to(g_largest, bytes);
}

void on_deallocate(std::size_t bytes) { g_current.fetch_sub(bytes); }
} // namespace scratch_stats

} // namespace dnnp
