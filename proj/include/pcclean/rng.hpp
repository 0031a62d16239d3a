// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>

namespace pcclean {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream); streams let per-item work
/// (one patch, one shape) stay reproducible regardless of visiting order.
[[nodiscard]] inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace pcclean
