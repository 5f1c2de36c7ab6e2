// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include "dnnp/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace dnnp::bench {

conv_desc layer_config::conv() const {
    conv_desc d;
    d.u = u;
    d.v = v;
    d.pad_h = pad_h;
    d.pad_w = pad_w;
    return d;
}

void layer_config::validate() const {
    if (n < 1 || c < 1 || h < 1 || w < 1 || k < 1 || r < 1 || s < 1)
        throw error(status::config_invalid, "layer " + name + ": extents must be >= 1");
    if (u < 1 || v < 1 || pad_h < 0 || pad_w < 0)
        throw error(status::config_invalid, "layer " + name + ": bad stride or padding");
    output_extent(h, r, u, pad_h);
    output_extent(w, s, v, pad_w);
}

layer_config layer_config::with_batch(dim_t batch) const {
    layer_config out = *this;
    out.n = batch;
    return out;
}

std::vector<layer_config> parse_suite(std::istream &in) {
    std::vector<layer_config> layers;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        layer_config cfg;
        if (!(fields >> cfg.name)) continue;
        dim_t *slots[] = {&cfg.n, &cfg.c, &cfg.h, &cfg.w, &cfg.k, &cfg.r, &cfg.s, &cfg.u, &cfg.v,
                &cfg.pad_h, &cfg.pad_w};
        for (dim_t *slot : slots)
            if (!(fields >> *slot))
                throw error(status::parse_error,
                        "line " + std::to_string(line_no) + ": expected 11 integers after the name");
        std::string extra;
        if (fields >> extra)
            throw error(status::parse_error,
                    "line " + std::to_string(line_no) + ": unexpected token '" + extra + "'");
        cfg.validate();
        layers.push_back(std::move(cfg));
    }
    return layers;
}

std::vector<layer_config> load_suite(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw error(status::parse_error, "cannot open suite file " + path);
    return parse_suite(in);
}

std::int64_t flop_count(const layer_config &cfg) {
    const dim_t p = output_extent(cfg.h, cfg.r, cfg.u, cfg.pad_h);
    const dim_t q = output_extent(cfg.w, cfg.s, cfg.v, cfg.pad_w);
    return 2 * cfg.n * cfg.k * cfg.c * cfg.r * cfg.s * p * q;
}

double peak_percent(double gflops, double peak_gflops) { return 100.0 * gflops / peak_gflops; }

double verify_tolerance(data_type dtype) { return dtype == data_type::f32 ? 1e-4 : 1e-10; }

engine parse_engine(const std::string &name) {
    if (name == "direct") return engine::direct;
    if (name == "explicit") return engine::explicit_lowering;
    if (name == "implicit") return engine::implicit_gemm;
    throw error(status::config_invalid, "unknown engine '" + name + "'");
}

namespace {

struct problem_data {
    std::vector<double> x, f;
};

problem_data make_problem(const layer_config &cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    problem_data d;
    d.x.resize(static_cast<std::size_t>(cfg.n * cfg.c * cfg.h * cfg.w));
    d.f.resize(static_cast<std::size_t>(cfg.k * cfg.c * cfg.r * cfg.s));
    for (double &v : d.x)
        v = uni(rng);
    // Keep outputs O(1) so the absolute verification tolerance is meaningful
    // independent of the reduction length C*R*S.
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.c * cfg.r * cfg.s));
    for (double &v : d.f)
        v = uni(rng) * scale;
    return d;
}

struct timed_output {
    double seconds = 0;
    std::vector<double> y;
};

template <typename T>
timed_output run_engine(const layer_config &cfg, const problem_data &data, engine eng,
        const run_options &opts, bool keep_output) {
    const data_type dt = data_type_v<T>;
    const std::vector<T> x(data.x.begin(), data.x.end());
    const std::vector<T> f(data.f.begin(), data.f.end());
    const tensor_desc xd = make_desc(cfg.n, cfg.c, cfg.h, cfg.w, layout::nchw, std::nullopt, dt);
    const filter_desc fd = make_filter_desc(cfg.k, cfg.c, cfg.r, cfg.s, dt);
    const conv_desc conv = cfg.conv();
    const tensor_desc yd = conv_output_desc(xd, fd, conv);
    std::vector<T> y(static_cast<std::size_t>(yd.element_count()));

    const tensor_view<const T> xv(xd, std::span<const T>(x));
    const filter_view<const T> fv(fd, std::span<const T>(f));
    const tensor_view<T> yv(yd, std::span<T>(y));
    auto once = [&] { conv_forward<T>(xv, fv, conv, eng, yv, T(1), T(0), opts.conv); };

    for (int i = 0; i < opts.warmup; ++i)
        once();
    std::vector<double> times;
    for (int i = 0; i < std::max(1, opts.repeats); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        once();
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(times.begin(), times.end());
    const std::size_t mid = times.size() / 2;
    timed_output out;
    out.seconds = times.size() % 2 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
    if (keep_output) out.y.assign(y.begin(), y.end());
    return out;
}

std::vector<double> oracle_output(const layer_config &cfg, const problem_data &data) {
    const tensor_desc xd
            = make_desc(cfg.n, cfg.c, cfg.h, cfg.w, layout::nchw, std::nullopt, data_type::f64);
    const filter_desc fd = make_filter_desc(cfg.k, cfg.c, cfg.r, cfg.s, data_type::f64);
    const tensor_desc yd = conv_output_desc(xd, fd, cfg.conv());
    std::vector<double> y(static_cast<std::size_t>(yd.element_count()));
    conv_forward<double>(tensor_view<const double>(xd, std::span<const double>(data.x)),
            filter_view<const double>(fd, std::span<const double>(data.f)), cfg.conv(),
            engine::direct, tensor_view<double>(yd, std::span<double>(y)));
    return y;
}

bench_result make_row(const std::string &layer, engine eng, data_type dt, dim_t batch,
        std::int64_t flops, double seconds, const run_options &opts) {
    bench_result row;
    row.layer = layer;
    row.engine = engine_name(eng);
    row.dtype = data_type_name(dt);
    row.batch = batch;
    row.flops = flops;
    row.seconds = seconds;
    row.gflops = seconds > 0 ? static_cast<double>(flops) / seconds / 1e9 : 0.0;
    if (opts.peak_gflops) row.peak_pct = peak_percent(row.gflops, *opts.peak_gflops);
    return row;
}

timed_output run_any(const layer_config &cfg, const problem_data &data, engine eng,
        const run_options &opts, bool keep_output) {
    return opts.dtype == data_type::f32 ? run_engine<float>(cfg, data, eng, opts, keep_output)
                                        : run_engine<double>(cfg, data, eng, opts, keep_output);
}

} // namespace

suite_report run_suite(const std::vector<layer_config> &layers, const run_options &opts) {
    suite_report report;
    const double tol = verify_tolerance(opts.dtype);

    struct totals {
        double gflops_sum = 0, seconds = 0;
        std::int64_t flops = 0;
        int count = 0;
        std::optional<double> err;
    };
    std::vector<totals> per_engine(opts.engines.size());

    for (std::size_t li = 0; li < layers.size(); ++li) {
        const layer_config cfg = opts.batch ? layers[li].with_batch(*opts.batch) : layers[li];
        cfg.validate();
        const problem_data data = make_problem(cfg, opts.seed + li);
        const std::int64_t flops = flop_count(cfg);
        std::vector<double> oracle;
        if (opts.verify) oracle = oracle_output(cfg, data);

        for (std::size_t ei = 0; ei < opts.engines.size(); ++ei) {
            const engine eng = opts.engines[ei];
            const timed_output t = run_any(cfg, data, eng, opts, opts.verify);
            bench_result row = make_row(cfg.name, eng, opts.dtype, cfg.n, flops, t.seconds, opts);
            if (opts.verify) {
                double err = 0;
                for (std::size_t i = 0; i < oracle.size(); ++i)
                    err = std::max(err, std::abs(t.y[i] - oracle[i]));
                row.max_abs_err = err;
                if (!(err <= tol)) report.failures.push_back(cfg.name + "/" + row.engine);
            }
            totals &tt = per_engine[ei];
            tt.gflops_sum += row.gflops;
            tt.seconds += row.seconds;
            tt.flops += row.flops;
            ++tt.count;
            if (row.max_abs_err) tt.err = std::max(tt.err.value_or(0.0), *row.max_abs_err);
            report.rows.push_back(std::move(row));
        }
    }

    if (layers.empty()) return report;
    const dim_t batch = opts.batch.value_or(layers.front().n);
    for (std::size_t ei = 0; ei < opts.engines.size(); ++ei) {
        const totals &tt = per_engine[ei];
        bench_result mean = make_row(
                suite_mean_row, opts.engines[ei], opts.dtype, batch, tt.flops, tt.seconds, opts);
        mean.gflops = tt.gflops_sum / tt.count;
        if (opts.peak_gflops) mean.peak_pct = peak_percent(mean.gflops, *opts.peak_gflops);
        mean.max_abs_err = tt.err;
        bench_result total = make_row(
                suite_total_row, opts.engines[ei], opts.dtype, batch, tt.flops, tt.seconds, opts);
        total.max_abs_err = tt.err;
        report.rows.push_back(std::move(mean));
        report.rows.push_back(std::move(total));
    }
    return report;
}

std::vector<sweep_row> batch_sweep(const layer_config &cfg, const std::vector<dim_t> &batches,
        engine eng, const run_options &opts) {
    std::vector<sweep_row> rows;
    for (std::size_t i = 0; i < batches.size(); ++i) {
        const layer_config at = cfg.with_batch(batches[i]);
        at.validate();
        const problem_data data = make_problem(at, opts.seed + i);
        const timed_output t = run_any(at, data, eng, opts, false);
        sweep_row row;
        row.batch = batches[i];
        row.flops = flop_count(at);
        row.seconds = t.seconds;
        row.gflops = t.seconds > 0 ? static_cast<double>(row.flops) / t.seconds / 1e9 : 0.0;
        rows.push_back(row);
    }
    double best = 0;
    for (const auto &r : rows)
        best = std::max(best, r.gflops);
    for (auto &r : rows)
        r.ratio_pct = best > 0 ? 100.0 * r.gflops / best : 100.0;
    return rows;
}

// ---------------------------------------------------------------------------
// CSV / JSON

namespace {

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string &s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw error(status::parse_error, "bad number '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string &s) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw error(status::parse_error, "bad integer '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string &line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string to_csv(const std::vector<bench_result> &rows) {
    std::ostringstream os;
    os << csv_header << '\n';
    for (const auto &r : rows) {
        os << r.layer << ',' << r.engine << ',' << r.dtype << ',' << r.batch << ',' << r.flops << ','
           << format_number(r.seconds) << ',' << format_number(r.gflops) << ','
           << (r.peak_pct ? format_number(*r.peak_pct) : "") << ','
           << (r.max_abs_err ? format_number(*r.max_abs_err) : "") << '\n';
    }
    return os.str();
}

std::vector<bench_result> parse_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || split(line, ',') != split(csv_header, ','))
        throw error(status::parse_error, "missing or unexpected CSV header");
    std::vector<bench_result> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split(line, ',');
        if (f.size() != 9) throw error(status::parse_error, "CSV row needs 9 fields: " + line);
        bench_result r;
        r.layer = f[0];
        r.engine = f[1];
        r.dtype = f[2];
        r.batch = parse_int(f[3]);
        r.flops = parse_int(f[4]);
        r.seconds = parse_double(f[5]);
        r.gflops = parse_double(f[6]);
        if (!f[7].empty()) r.peak_pct = parse_double(f[7]);
        if (!f[8].empty()) r.max_abs_err = parse_double(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string to_json(const std::vector<bench_result> &rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto &r : rows) {
        nlohmann::json j;
        j["layer"] = r.layer;
        j["engine"] = r.engine;
        j["dtype"] = r.dtype;
        j["batch"] = r.batch;
        j["flops"] = r.flops;
        j["seconds"] = r.seconds;
        j["gflops"] = r.gflops;
        j["peak_pct"] = r.peak_pct ? nlohmann::json(*r.peak_pct) : nlohmann::json(nullptr);
        j["max_abs_err"] = r.max_abs_err ? nlohmann::json(*r.max_abs_err) : nlohmann::json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<bench_result> parse_json(const std::string &text) {
    std::vector<bench_result> rows;
    try {
        const auto arr = nlohmann::json::parse(text);
        if (!arr.is_array()) throw error(status::parse_error, "JSON results must be an array");
        for (const auto &j : arr) {
            bench_result r;
            r.layer = j.at("layer").get<std::string>();
            r.engine = j.at("engine").get<std::string>();
            r.dtype = j.at("dtype").get<std::string>();
            r.batch = j.at("batch").get<dim_t>();
            r.flops = j.at("flops").get<std::int64_t>();
            r.seconds = j.at("seconds").get<double>();
            r.gflops = j.at("gflops").get<double>();
            if (!j.at("peak_pct").is_null()) r.peak_pct = j.at("peak_pct").get<double>();
            if (!j.at("max_abs_err").is_null()) r.max_abs_err = j.at("max_abs_err").get<double>();
            rows.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception &e) {
        throw error(status::parse_error, e.what());
    }
    return rows;
}

std::string sweep_to_csv(const std::string &layer, const std::string &engine,
        const std::string &dtype, const std::vector<sweep_row> &rows) {
    std::ostringstream os;
    os << "layer,engine,dtype,batch,flops,seconds,gflops,ratio_pct\n";
    for (const auto &r : rows)
        os << layer << ',' << engine << ',' << dtype << ',' << r.batch << ',' << r.flops << ','
           << format_number(r.seconds) << ',' << format_number(r.gflops) << ','
           << format_number(r.ratio_pct) << '\n';
    return os.str();
}

} // namespace dnnp::bench
