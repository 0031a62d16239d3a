// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Small fixtures shared by the test binaries.

#pragma once

#include <random>

#include "pcclean/pcclean.hpp"

namespace pcclean::testing_support {

/// Narrow widths so end-to-end checks run in milliseconds.
inline ModelConfig tiny_config(ModelKind kind, GraphConvVariant variant = GraphConvVariant::Dynamic,
                               std::size_t k = 16) {
  ModelConfig c = ModelConfig::for_kind(kind);
  c.k = k;
  c.variant = variant;
  c.local_widths = {5, 6, 7, 8};
  c.global_width = 9;
  c.head_widths = {7, 6};
  c.qstn_widths = {5, 6};
  c.qstn_hidden = 5;
  return c;
}

/// m points in the unit ball with the center at the origin, as a patch.
inline Patch random_patch(std::size_t m, std::uint64_t seed, double scale = 0.1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Patch p;
  p.scale = scale;
  p.centroid_offset = {u(rng), u(rng), u(rng)};
  p.points.push_back({0, 0, 0});
  while (p.points.size() < m) {
    const Point3 q{u(rng), u(rng), u(rng)};
    if (norm(q) <= 1.0) p.points.push_back(q);
  }
  return p;
}

/// Perturbs every parameter so that no layer sits at its special initial
/// value (identity quaternion, zero denoiser output).
inline void jitter(Model& m, std::uint64_t seed, double amount = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amount, amount);
  for (auto& [_, t] : m.params.entries())
    for (double& v : t.mutable_values()) v += u(rng);
}

}  // namespace pcclean::testing_support
