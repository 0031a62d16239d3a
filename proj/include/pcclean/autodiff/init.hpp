// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pcclean/autodiff/tensor.hpp"
#include "pcclean/rng.hpp"

namespace pcclean::ad {

/// He initialization: N(0, 2 / fan_in). fan_in defaults to shape[0], the
/// input width of a (in, out) weight.
[[nodiscard]] inline Tensor init_he(const Shape& shape, std::uint64_t seed, std::size_t fan_in = 0) {
  if (fan_in == 0) fan_in = shape.empty() ? 1 : shape[0];
  if (fan_in == 0) throw InvalidArgument("init_he: fan_in must be positive");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  std::vector<double> v(numel(shape));
  for (double& x : v) x = dist(rng);
  return Tensor(shape, std::move(v), true);
}

/// I.i.d. uniform values in (lo, hi).
[[nodiscard]] inline Tensor init_uniform(const Shape& shape, double lo, double hi, std::uint64_t seed) {
  if (!(lo < hi)) throw InvalidArgument("init_uniform: need lo < hi");
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(numel(shape));
  for (double& x : v) {
    do {
      x = dist(rng);
    } while (x == lo);  // open interval
  }
  return Tensor(shape, std::move(v), true);
}

}  // namespace pcclean::ad
