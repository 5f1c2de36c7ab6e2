// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DNNP_BENCH_HPP
#define DNNP_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dnnp/conv.hpp"

namespace dnnp::bench {

/// One convolution layer: the eleven problem parameters plus a name.
struct layer_config {
    std::string name;
    dim_t n = 1, c = 1, h = 1, w = 1;
    dim_t k = 1, r = 1, s = 1;
    dim_t u = 1, v = 1, pad_h = 0, pad_w = 0;

    conv_desc conv() const;
    /// Throws config_invalid / empty_output for configs no engine can run.
    void validate() const;
    layer_config with_batch(dim_t batch) const;

    bool operator==(const layer_config &) const = default;
};

/// Suite format: one layer per line, `name N C H W K R S u v pad_h pad_w`.
/// Blank lines and anything after `#` are ignored.
std::vector<layer_config> parse_suite(std::istream &in);
std::vector<layer_config> load_suite(const std::string &path);

/// 2 * N * K * C * R * S * P * Q multiply-add accounting.
std::int64_t flop_count(const layer_config &cfg);

/// gflops as a percentage of a peak rate given in GFLOP/s.
double peak_percent(double gflops, double peak_gflops);

struct bench_result {
    std::string layer;
    std::string engine;
    std::string dtype;
    dim_t batch = 0;
    std::int64_t flops = 0;
    double seconds = 0;
    double gflops = 0;
    std::optional<double> peak_pct;
    std::optional<double> max_abs_err;

    bool operator==(const bench_result &) const = default;
};

/// Suite-level rows appended after the per-layer rows, one pair per engine.
inline constexpr const char *suite_mean_row = "suite_mean"; ///< arithmetic mean of gflops
inline constexpr const char *suite_total_row = "suite_total"; ///< total flops / total seconds

struct run_options {
    std::vector<engine> engines {engine::direct, engine::explicit_lowering, engine::implicit_gemm};
    data_type dtype = data_type::f32;
    std::optional<dim_t> batch;
    int repeats = 5;
    int warmup = 1;
    bool verify = false;
    std::optional<double> peak_gflops;
    std::uint64_t seed = 2014;
    conv_options conv {};
};

/// Absolute error allowed against the f64 direct oracle.
double verify_tolerance(data_type dtype);

struct suite_report {
    std::vector<bench_result> rows;
    /// Layer/engine pairs whose verification error exceeded the tolerance.
    std::vector<std::string> failures;
};

/// Times every layer x engine (one warmup, median of repeats) on
/// pseudo-random inputs drawn from a fixed seed. With verify, each result
/// is compared against a double-precision direct evaluation.
suite_report run_suite(const std::vector<layer_config> &layers, const run_options &opts);

struct sweep_row {
    dim_t batch = 0;
    std::int64_t flops = 0;
    double seconds = 0;
    double gflops = 0;
    /// gflops relative to the best batch of the sweep, in percent.
    double ratio_pct = 0;
};

std::vector<sweep_row> batch_sweep(const layer_config &cfg, const std::vector<dim_t> &batches,
        engine eng, const run_options &opts);

inline constexpr const char *csv_header = "layer,engine,dtype,batch,flops,seconds,gflops,peak_pct,max_abs_err";

std::string to_csv(const std::vector<bench_result> &rows);
std::string to_json(const std::vector<bench_result> &rows);
std::vector<bench_result> parse_csv(const std::string &text);
std::vector<bench_result> parse_json(const std::string &text);

std::string sweep_to_csv(const std::string &layer, const std::string &engine,
        const std::string &dtype, const std::vector<sweep_row> &rows);

engine parse_engine(const std::string &name);

/// Entry point of the `bench` tool. Returns the process exit code:
/// 0 success, 1 usage or configuration error, 2 verification failure.
int cli_main(int argc, char **argv, std::ostream &out, std::ostream &err);

} // namespace dnnp::bench

#endif
