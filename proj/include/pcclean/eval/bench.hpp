// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-point inference timing. Patches are extracted up front; only the
// network forward passes are timed, on the calling thread.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "pcclean/detector.hpp"
#include "pcclean/eval/metrics.hpp"
#include "pcclean/network/forward.hpp"

namespace pcclean {

struct BenchReport {
  GraphConvVariant variant = GraphConvVariant::Dynamic;
  ModelKind stage = ModelKind::Detector;
  std::size_t points = 0;
  std::size_t repetitions = 0;
  double wall_time = 0.0;  ///< median seconds per pass over all points
  double seconds_per_point = 0.0;
  std::vector<double> samples;  ///< seconds per pass, in run order

  [[nodiscard]] MetricReport report() const {
    MetricReport r;
    r.add("variant", to_string(variant))
        .add("stage", to_string(stage))
        .add("points", points)
        .add("repetitions", repetitions)
        .add("wall_time_median_s", wall_time)
        .add("seconds_per_point", seconds_per_point)
        .add("execution", std::string("single thread"));
    return r;
  }
};

namespace detail {

inline volatile double bench_sink = 0.0;

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Median wall time of `repetitions` passes over the first `max_points`
/// points of `cloud` (all points when 0), after one warm-up pass. The model
/// runs with its graph-conv variant replaced by `variant`; parameters are
/// shared between variants, so timings are directly comparable.
[[nodiscard]] inline BenchReport bench_per_point(const Model& model, GraphConvVariant variant, const PointCloud& cloud,
                                                 std::size_t repetitions, const InferenceOptions& opt = {},
                                                 std::size_t max_points = 0) {
  detail::require(repetitions >= 3, "bench_per_point: need at least 3 repetitions");
  require_non_empty(cloud, "bench_per_point");
  Model m{model.kind, model.config, model.params};
  m.config.variant = variant;

  const PatchExtractor extractor(cloud, inference_patch_options(cloud, m.config, opt.patch_points, opt.radius_fraction));
  const std::size_t n = max_points == 0 ? cloud.size() : std::min(max_points, cloud.size());
  std::vector<Patch> patches;
  patches.reserve(n);
  for (std::size_t i = 0; i < n; ++i) patches.push_back(extractor.extract(i, opt.seed));

  auto pass = [&] {
    double acc = 0.0;
    for (const Patch& p : patches) {
      ad::Tape tape(false);
      const ad::Tensor y = m.kind == ModelKind::Detector ? detector_forward(tape, p, m) : denoiser_forward(tape, p, m);
      acc += y.values()[0];
    }
    detail::bench_sink = detail::bench_sink + acc;
  };

  pass();  // warm-up
  BenchReport r;
  r.variant = variant;
  r.stage = m.kind;
  r.points = n;
  r.repetitions = repetitions;
  for (std::size_t i = 0; i < repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    pass();
    const auto t1 = std::chrono::steady_clock::now();
    r.samples.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  r.wall_time = detail::median(r.samples);
  r.seconds_per_point = r.wall_time / static_cast<double>(n);
  return r;
}

}  // namespace pcclean
