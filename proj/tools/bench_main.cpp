// Copyright (C) 2026 The dnnp Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "dnnp/bench.hpp"

int main(int argc, char **argv) {
    return dnnp::bench::cli_main(argc, argv, std::cout, std::cerr);
}
