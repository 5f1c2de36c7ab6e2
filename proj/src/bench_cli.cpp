// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "dnnp/bench.hpp"

namespace dnnp::bench {

namespace {

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

data_type parse_dtype(const std::string &s) {
    if (s == "f32") return data_type::f32;
    if (s == "f64") return data_type::f64;
    throw error(status::config_invalid, "dtype must be f32 or f64");
}

void write_file(const std::string &path, const std::string &text) {
    std::ofstream out(path);
    if (!out) throw error(status::config_invalid, "cannot write " + path);
    out << text;
}

std::string human_table(const std::vector<bench_result> &rows) {
    std::string s;
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %-9s %-4s %6s %10s %10s %7s %11s\n", "layer", "engine",
            "type", "batch", "seconds", "gflops", "peak", "max_err");
    s += line;
    for (const auto &r : rows) {
        const std::string peak
                = r.peak_pct ? std::to_string(static_cast<long>(std::lround(*r.peak_pct))) + "%" : "-";
        char err[32] = "-";
        if (r.max_abs_err) std::snprintf(err, sizeof err, "%.3g", *r.max_abs_err);
        std::snprintf(line, sizeof line, "%-12s %-9s %-4s %6lld %10.4f %10.2f %7s %11s\n",
                r.layer.c_str(), r.engine.c_str(), r.dtype.c_str(), static_cast<long long>(r.batch),
                r.seconds, r.gflops, peak.c_str(), err);
        s += line;
    }
    return s;
}

} // namespace

int cli_main(int argc, char **argv, std::ostream &out, std::ostream &err) {
    CLI::App app {"Convolution engine benchmark and verification harness", "bench"};
    app.require_subcommand(1);

    std::string suite_path = "table2.suite";
    std::string engines_arg = "direct,explicit,implicit";
    std::string dtype_arg = "f32";
    dim_t batch = 0;
    int repeats = 5, warmup = 1, threads = 0;
    bool verify = false;
    double peak = 0;
    std::string format = "csv", out_path, json_out_path;
    std::uint64_t seed = run_options {}.seed;

    auto add_common = [&](CLI::App *cmd) {
        cmd->add_option("--suite", suite_path, "Layer suite file")->capture_default_str();
        cmd->add_option("--dtype", dtype_arg, "Element type: f32 or f64")
                ->check(CLI::IsMember({"f32", "f64"}))
                ->capture_default_str();
        cmd->add_option("--repeats", repeats, "Timed runs per measurement (median reported)")
                ->check(CLI::PositiveNumber)
                ->capture_default_str();
        cmd->add_option("--warmup", warmup, "Untimed runs before timing")
                ->check(CLI::NonNegativeNumber)
                ->capture_default_str();
        cmd->add_option("--threads", threads, "Worker threads (default: hardware concurrency)")
                ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Input generator seed")->capture_default_str();
        cmd->add_option("--format", format, "Output format: csv or json")
                ->check(CLI::IsMember({"csv", "json"}))
                ->capture_default_str();
        cmd->add_option("--out", out_path, "Write results here instead of stdout");
    };

    CLI::App *run = app.add_subcommand("run", "Benchmark every layer of a suite");
    add_common(run);
    run->add_option("--engines", engines_arg, "Comma-separated: direct,explicit,implicit")
            ->capture_default_str();
    run->add_option("--batch", batch, "Override the suite's mini-batch size")
            ->check(CLI::PositiveNumber);
    run->add_flag("--verify", verify, "Check each engine against a double-precision direct oracle");
    run->add_option("--peak", peak, "Peak rate in GFLOP/s for utilization columns")
            ->check(CLI::PositiveNumber);
    run->add_option("--json-out", json_out_path, "Also write the results as JSON to this file");

    std::string layer_name;
    std::string batches_arg = "16,32,64,128";
    std::string engine_arg = "implicit";
    CLI::App *sweep = app.add_subcommand("sweep", "Throughput of one layer across batch sizes");
    add_common(sweep);
    sweep->add_option("--layer", layer_name, "Layer name from the suite")->required();
    sweep->add_option("--batches", batches_arg, "Comma-separated batch sizes")->capture_default_str();
    sweep->add_option("--engine", engine_arg, "Engine to sweep")->capture_default_str();

    CLI::App *flops = app.add_subcommand("flops", "Print the FLOP count of each suite layer");
    flops->add_option("--suite", suite_path, "Layer suite file")->capture_default_str();
    flops->add_option("--batch", batch, "Override the suite's mini-batch size")
            ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError &e) {
        err << "bench: " << e.what() << "\n";
        return 1;
    }

    try {
        if (threads > 0) set_num_threads(threads);
        const std::vector<layer_config> layers = load_suite(suite_path);

        run_options opts;
        opts.dtype = parse_dtype(dtype_arg);
        opts.repeats = repeats;
        opts.warmup = warmup;
        opts.seed = seed;

        auto emit = [&](const std::string &text) {
            if (out_path.empty())
                out << text;
            else
                write_file(out_path, text);
        };

        if (*flops) {
            for (const auto &l : layers) {
                const layer_config cfg = batch > 0 ? l.with_batch(batch) : l;
                out << cfg.name << " N=" << cfg.n << " flops=" << flop_count(cfg) << "\n";
            }
            return 0;
        }

        if (*run) {
            opts.engines.clear();
            for (const auto &name : split_list(engines_arg))
                opts.engines.push_back(parse_engine(name));
            if (opts.engines.empty()) throw error(status::config_invalid, "no engines selected");
            opts.verify = verify;
            // Full-size suite layers are too heavy for the f64 oracle on a
            // desk machine; verification runs default to N = 16.
            if (batch > 0)
                opts.batch = batch;
            else if (verify)
                opts.batch = 16;
            if (peak > 0) opts.peak_gflops = peak;

            const suite_report report = run_suite(layers, opts);
            emit(format == "csv" ? to_csv(report.rows) : to_json(report.rows));
            if (!json_out_path.empty()) write_file(json_out_path, to_json(report.rows));
            if (!out_path.empty()) out << human_table(report.rows);
            if (!report.failures.empty()) {
                err << "bench: verification failed for";
                for (const auto &f : report.failures)
                    err << " " << f;
                err << " (tolerance " << verify_tolerance(opts.dtype) << ")\n";
                return 2;
            }
            return 0;
        }

        const auto it = std::find_if(layers.begin(), layers.end(),
                [&](const layer_config &l) { return l.name == layer_name; });
        if (it == layers.end())
            throw error(status::config_invalid, "layer '" + layer_name + "' not in " + suite_path);
        std::vector<dim_t> batches;
        for (const auto &b : split_list(batches_arg)) {
            std::size_t used = 0;
            long long v = 0;
            try {
                v = std::stoll(b, &used);
            } catch (const std::exception &) {
                used = 0;
            }
            if (used != b.size() || v < 1)
                throw error(status::config_invalid, "bad batch size '" + b + "'");
            batches.push_back(v);
        }
        if (batches.empty()) throw error(status::config_invalid, "no batch sizes given");
        const engine eng = parse_engine(engine_arg);
        const auto rows = batch_sweep(*it, batches, eng, opts);
        if (format == "csv") {
            emit(sweep_to_csv(it->name, engine_name(eng), dtype_arg, rows));
        } else {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto &r : rows)
                arr.push_back({{"layer", it->name}, {"engine", engine_name(eng)},
                        {"dtype", dtype_arg}, {"batch", r.batch}, {"flops", r.flops},
                        {"seconds", r.seconds}, {"gflops", r.gflops}, {"ratio_pct", r.ratio_pct}});
            emit(arr.dump(2) + "\n");
        }
        return 0;
    } catch (const error &e) {
        err << "bench: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        err << "bench: " << e.what() << "\n";
        return 1;
    }
}

} // namespace dnnp::bench
