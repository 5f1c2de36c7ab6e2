// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DNNP_TESTS_CLI_ARGS_HPP
#define DNNP_TESTS_CLI_ARGS_HPP

#include <sstream>
#include <string>
#include <vector>

#include "dnnp/bench.hpp"

namespace dnnp::testkit {

struct cli_outcome {
    int code;
    std::string out, err;
};

/// Runs the bench entry point in-process with argv = {"bench", args...}.
inline cli_outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "bench");
    std::vector<char *> argv;
    for (auto &a : args)
        argv.push_back(a.data());
    argv.push_back(nullptr);
    std::ostringstream out, err;
    const int code = bench::cli_main(static_cast<int>(args.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

} // namespace dnnp::testkit

#endif
