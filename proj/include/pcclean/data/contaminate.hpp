// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Noise and outlier injection producing index-aligned (clean, contaminated)
// pairs: contaminated point i always derives from clean point i.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pcclean/data/shapes.hpp"
#include "pcclean/geometry.hpp"
#include "pcclean/rng.hpp"
#include "pcclean/spatial_index.hpp"

namespace pcclean {

/// Unit of ContaminationSpec::outlier_min_distance.
enum class DistanceUnit {
  DiagonalFraction,  ///< multiples of the clean bounding-box diagonal
  NoiseSigma,        ///< multiples of the noise standard deviation
};

[[nodiscard]] inline DistanceUnit parse_distance_unit(std::string_view s) {
  if (s == "diagonal") return DistanceUnit::DiagonalFraction;
  if (s == "sigma") return DistanceUnit::NoiseSigma;
  throw InvalidArgument("unknown distance unit '" + std::string(s) + "' (expected diagonal or sigma)");
}

[[nodiscard]] inline std::string to_string(DistanceUnit u) {
  return u == DistanceUnit::DiagonalFraction ? "diagonal" : "sigma";
}

/// Noise is isotropic Gaussian with std = noise_level * diagonal. The icosahedron
/// experiment this tool mirrors reported its noise as "20% on the diagonal";
/// the defaults here use 1-2%, and 0.20 remains reachable.
struct ContaminationSpec {
  double noise_level = 0.01;
  double outlier_fraction = 0.0;
  double outlier_min_distance = 0.015;
  DistanceUnit distance_unit = DistanceUnit::DiagonalFraction;
  std::uint64_t seed = 0;
  std::size_t max_rejections = 100000;  ///< per outlier

  void validate() const {
    detail::require(noise_level >= 0.0 && std::isfinite(noise_level), "noise_level must be finite and >= 0");
    detail::require(outlier_fraction >= 0.0 && outlier_fraction <= 1.0, "outlier_fraction must lie in [0, 1]");
    detail::require(outlier_min_distance >= 0.0 && std::isfinite(outlier_min_distance),
                    "outlier_min_distance must be finite and >= 0");
  }
};

struct PairedCloud {
  PointCloud clean;
  PointCloud contaminated;  ///< carries the outlier labels
  std::vector<std::uint32_t> correspondence;
  std::vector<std::uint8_t> labels;
};

using SurfaceDistance = std::function<double(Point3)>;

/// Distance to the nearest point of a sampled cloud, for surfaces known only
/// through samples.
[[nodiscard]] inline SurfaceDistance sampled_surface_distance(const PointCloud& clean) {
  auto index = std::make_shared<const SpatialIndex>(clean);
  return [index](Point3 p) { return std::sqrt(index->knn(p, 1).front().squared_distance); };
}

[[nodiscard]] inline PairedCloud contaminate(const PointCloud& clean, const ContaminationSpec& spec,
                                             const SurfaceDistance& surface_distance) {
  require_non_empty(clean, "contaminate");
  spec.validate();
  const std::size_t n = clean.size();
  const BoundingBox box = bounding_box(clean);
  const double diag = box.diagonal();
  const double sigma = spec.noise_level * diag;
  const double cutoff =
      spec.outlier_min_distance * (spec.distance_unit == DistanceUnit::DiagonalFraction ? diag : sigma);

  Rng rng = make_rng(spec.seed, 0xC0117A);
  PairedCloud out;
  out.clean = clean;
  out.clean.labels.reset();
  out.contaminated.points = clean.points;
  if (sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (Point3& p : out.contaminated.points) {
      const double dx = noise(rng);
      const double dy = noise(rng);
      const double dz = noise(rng);
      p += Point3{dx, dy, dz};
    }
  }

  out.labels.assign(n, 0);
  const auto n_outliers = static_cast<std::size_t>(std::llround(spec.outlier_fraction * static_cast<double>(n)));
  if (n_outliers > 0) {
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::uint32_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    const BoundingBox region = box.expanded(1.5);
    std::uniform_real_distribution<double> ux(region.min.x, region.max.x);
    std::uniform_real_distribution<double> uy(region.min.y, region.max.y);
    std::uniform_real_distribution<double> uz(region.min.z, region.max.z);
    for (std::size_t o = 0; o < n_outliers; ++o) {
      bool placed = false;
      for (std::size_t attempt = 0; attempt < spec.max_rejections; ++attempt) {
        const double x = ux(rng);
        const double y = uy(rng);
        const double z = uz(rng);
        const Point3 cand{x, y, z};
        if (surface_distance(cand) > cutoff) {
          out.contaminated.points[idx[o]] = cand;
          out.labels[idx[o]] = 1;
          placed = true;
          break;
        }
      }
      if (!placed) {
        throw RuntimeFailure("contaminate: no outlier position farther than " + std::to_string(cutoff) +
                             " from the surface found in " + std::to_string(spec.max_rejections) +
                             " tries; outlier_min_distance is too large for the bounding box");
      }
    }
  }
  out.correspondence.resize(n);
  std::iota(out.correspondence.begin(), out.correspondence.end(), std::uint32_t{0});
  out.contaminated.labels = out.labels;
  return out;
}

/// Contamination against the exact analytic surface of `shape`.
[[nodiscard]] inline PairedCloud contaminate(const PointCloud& clean, const ContaminationSpec& spec,
                                             const Shape& shape) {
  return contaminate(clean, spec, [&shape](Point3 p) { return shape.surface_distance(p); });
}

/// Contamination against the sampled clean cloud itself.
[[nodiscard]] inline PairedCloud contaminate(const PointCloud& clean, const ContaminationSpec& spec) {
  require_non_empty(clean, "contaminate");
  return contaminate(clean, spec, sampled_surface_distance(clean));
}

}  // namespace pcclean
