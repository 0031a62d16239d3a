// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcclean/cli.hpp"

int main(int argc, char** argv) { return pcclean::cli::run(argc, argv); }
