// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_args.hpp"
#include "dnnp/bench.hpp"
#include "test_support.hpp"

using namespace dnnp;
using namespace dnnp::bench;
using dnnp::testkit::run_cli;
using dnnp::testkit::status_of;

namespace {

std::vector<layer_config> parse(const std::string &text) {
    std::istringstream in(text);
    return parse_suite(in);
}

std::string read_file(const std::filesystem::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path temp_path(const std::string &name) {
    return std::filesystem::temp_directory_path() / ("dnnp_test_bench_" + name);
}

} // namespace

TEST(Suite, ParsesBundledFile) {
    const auto layers = load_suite(DNNP_SUITE_PATH);
    ASSERT_EQ(layers.size(), 5u);
    EXPECT_EQ(layers[0].name, "layer1");
    EXPECT_EQ(layers[0], (layer_config {"layer1", 128, 3, 128, 128, 96, 11, 11, 1, 1, 0, 0}));
    EXPECT_EQ(layers[4], (layer_config {"layer5", 128, 128, 13, 13, 384, 3, 3, 1, 1, 0, 0}));
}

TEST(Suite, CommentsAndBlankLines) {
    const auto layers = parse("# header\n\n  a 1 2 3 4 5 1 1 1 1 0 0 # trailing\n");
    ASSERT_EQ(layers.size(), 1u);
    EXPECT_EQ(layers[0].k, 5);
}

TEST(Suite, Errors) {
    EXPECT_EQ(status_of([] { parse("a 1 2 3\n"); }), status::parse_error);
    EXPECT_EQ(status_of([] { parse("a 1 1 1 1 1 1 1 1 1 0 0 9\n"); }), status::parse_error);
    EXPECT_EQ(status_of([] { parse("a 1 1 1 1 1 1 1 x 1 0 0\n"); }), status::parse_error);
    EXPECT_EQ(status_of([] { parse("a 1 1 4 4 1 1 1 0 1 0 0\n"); }), status::config_invalid);
    EXPECT_EQ(status_of([] { parse("a 1 1 2 2 1 5 5 1 1 0 0\n"); }), status::empty_output);
    EXPECT_EQ(status_of([] { load_suite("/nonexistent/none.suite"); }), status::parse_error);
}

TEST(Flops, Examples) {
    const layer_config l5 {"layer5", 128, 128, 13, 13, 384, 3, 3, 1, 1, 0, 0};
    // 2 * N * K * C * R * S * P * Q with P = Q = 11.
    EXPECT_EQ(flop_count(l5), std::int64_t(2) * 128 * 384 * 128 * 9 * 121);
    EXPECT_EQ(flop_count(l5), 13'702'791'168);
    EXPECT_EQ(flop_count(layer_config {"one"}), 2);
    EXPECT_EQ(flop_count(l5.with_batch(256)), 2 * flop_count(l5));
}

TEST(Flops, PeakPercent) {
    EXPECT_EQ(std::lround(peak_percent(990, 4290)), 23);
    EXPECT_DOUBLE_EQ(peak_percent(4290, 4290), 100.0);
}

TEST(Report, CsvAndJsonRoundTrip) {
    std::vector<bench_result> rows {
            {"layer1", "implicit", "f32", 16, 123456789, 0.125, 0.987654321, 23.0769, 1.5e-6},
            {"layer2", "direct", "f64", 2, 42, 1e-9, 42.0, std::nullopt, std::nullopt},
            {"suite_mean", "direct", "f64", 2, 0, 0, 0.1 + 0.2, 1.0 / 3, std::nullopt},
    };
    const std::string csv = to_csv(rows);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), csv_header);
    EXPECT_EQ(parse_csv(csv), rows);
    EXPECT_EQ(parse_json(to_json(rows)), rows);
    EXPECT_EQ(parse_csv(csv), parse_json(to_json(rows)));
}

TEST(Report, MalformedInput) {
    EXPECT_EQ(status_of([] { parse_csv("not,a,header\n"); }), status::parse_error);
    EXPECT_EQ(status_of([] { parse_json("{"); }), status::parse_error);
}

TEST(RunSuite, DirectSmokeOnSmallBatch) {
    const auto layers = load_suite(DNNP_SUITE_PATH);
    run_options opts;
    opts.engines = {engine::direct};
    opts.batch = 2;
    opts.repeats = 1;
    opts.warmup = 0;
    opts.verify = true;
    opts.peak_gflops = 4290;
    const auto report = run_suite({layers[4]}, opts);
    EXPECT_TRUE(report.failures.empty());
    ASSERT_GE(report.rows.size(), 1u);
    const auto &r = report.rows[0];
    EXPECT_EQ(r.layer, "layer5");
    EXPECT_EQ(r.batch, 2);
    EXPECT_GT(r.gflops, 0);
    ASSERT_TRUE(r.peak_pct.has_value());
    EXPECT_NEAR(*r.peak_pct, 100 * r.gflops / 4290, 1e-9);
    ASSERT_TRUE(r.max_abs_err.has_value());
    EXPECT_LE(*r.max_abs_err, verify_tolerance(data_type::f32));
}

TEST(RunSuite, DeterministicExceptTiming) {
    const layer_config tiny {"tiny", 2, 3, 8, 8, 4, 3, 3, 1, 1, 1, 1};
    run_options opts;
    opts.repeats = 1;
    opts.warmup = 0;
    opts.verify = true;
    const auto a = run_suite({tiny}, opts), b = run_suite({tiny}, opts);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].layer, b.rows[i].layer);
        EXPECT_EQ(a.rows[i].engine, b.rows[i].engine);
        EXPECT_EQ(a.rows[i].flops, b.rows[i].flops);
        EXPECT_EQ(a.rows[i].max_abs_err, b.rows[i].max_abs_err);
    }
}

TEST(Sweep, SingleBatchIsFullRatio) {
    const layer_config l {"l", 1, 4, 10, 10, 8, 3, 3, 1, 1, 0, 0};
    run_options opts;
    opts.repeats = 1;
    opts.warmup = 0;
    const auto rows = batch_sweep(l, {1}, engine::implicit_gemm, opts);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].ratio_pct, 100.0);
}

TEST(Sweep, FlopsMonotoneInBatch) {
    const layer_config l {"l", 1, 4, 8, 8, 4, 3, 3, 1, 1, 0, 0};
    run_options opts;
    opts.repeats = 1;
    opts.warmup = 0;
    const auto rows = batch_sweep(l, {1, 2, 4, 8}, engine::implicit_gemm, opts);
    ASSERT_EQ(rows.size(), 4u);
    double best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].flops, flop_count(l.with_batch(rows[i].batch)));
        if (i > 0) {
            EXPECT_GT(rows[i].flops, rows[i - 1].flops);
        }
        EXPECT_LE(rows[i].ratio_pct, 100.0);
        best = std::max(best, rows[i].ratio_pct);
    }
    EXPECT_EQ(best, 100.0);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli({}).code, 1);
    EXPECT_EQ(run_cli({"bogus"}).code, 1);
    EXPECT_EQ(run_cli({"run", "--suite", "/nonexistent.suite"}).code, 1);
    EXPECT_EQ(run_cli({"run", "--suite", DNNP_SUITE_PATH, "--engines", "warp"}).code, 1);
    EXPECT_EQ(run_cli({"run", "--suite", DNNP_SUITE_PATH, "--dtype", "f16"}).code, 1);
    EXPECT_EQ(run_cli({"sweep", "--suite", DNNP_SUITE_PATH}).code, 1);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, FlopsSubcommand) {
    const auto r = run_cli({"flops", "--suite", DNNP_SUITE_PATH});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("layer5 N=128 flops=13702791168"), std::string::npos) << r.out;
}

TEST(Cli, RunWritesCsvAndJson) {
    const auto suite = temp_path("small.suite"), csv = temp_path("out.csv"), json = temp_path("out.json");
    std::ofstream(suite) << "small 2 3 9 9 4 3 3 2 2 1 1\n";
    const auto r = run_cli({"run", "--suite", suite.string(), "--repeats", "1", "--warmup", "0",
            "--verify", "--dtype", "f64", "--peak", "100", "--out", csv.string(), "--json-out",
            json.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(read_file(csv));
    EXPECT_EQ(rows, parse_json(read_file(json)));
    ASSERT_GE(rows.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(rows[i].layer, "small");
        EXPECT_EQ(rows[i].dtype, "f64");
        ASSERT_TRUE(rows[i].max_abs_err.has_value());
        EXPECT_LE(*rows[i].max_abs_err, 1e-10);
    }
    // Human-readable table on stdout when results go to a file.
    EXPECT_NE(r.out.find("small"), std::string::npos);
    std::filesystem::remove(suite);
    std::filesystem::remove(csv);
    std::filesystem::remove(json);
}

TEST(Cli, SweepJson) {
    const auto suite = temp_path("sweep.suite");
    std::ofstream(suite) << "s 1 2 6 6 2 3 3 1 1 0 0\n";
    const auto r = run_cli({"sweep", "--suite", suite.string(), "--layer", "s", "--batches", "1,2",
            "--repeats", "1", "--warmup", "0", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\"ratio_pct\""), std::string::npos);
    EXPECT_EQ(run_cli({"sweep", "--suite", suite.string(), "--layer", "missing"}).code, 1);
    EXPECT_EQ(run_cli({"sweep", "--suite", suite.string(), "--layer", "s", "--batches", "0"}).code, 1);
    std::filesystem::remove(suite);
}
