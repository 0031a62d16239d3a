// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Local patch extraction. A patch is the ball of a given radius around a
// center point, resampled to a fixed point count and expressed in a frame
// centered on the center point and scaled to the unit ball.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pcclean/geometry.hpp"
#include "pcclean/rng.hpp"
#include "pcclean/spatial_index.hpp"

namespace pcclean {

struct PatchOptions {
  double radius = 0.0;      ///< world units; see radius_for()
  std::size_t points = 500;  ///< m, the fixed patch size
  /// When the ball holds fewer than min_neighbors + 1 points, the patch is
  /// taken from the min_neighbors nearest points cloud-wide instead. 0 disables.
  std::size_t min_neighbors = 0;

  static constexpr double kDefaultRadiusFraction = 0.05;

  /// Default radius: a fraction of the bounding-box diagonal.
  [[nodiscard]] static double radius_for(const PointCloud& cloud,
                                         double fraction = kDefaultRadiusFraction) {
    return fraction * bounding_box(cloud).diagonal();
  }
};

struct Patch {
  std::size_t center_index = 0;
  std::vector<Point3> points;  ///< normalized; points[0] is the center
  double scale = 1.0;
  Point3 centroid_offset;  ///< world position of the patch origin (the center point)

  [[nodiscard]] Point3 denormalize(Point3 q) const { return q * scale + centroid_offset; }
  [[nodiscard]] std::size_t size() const { return points.size(); }
};

namespace detail {

inline Patch make_patch(const std::vector<Point3>& cloud, std::size_t center, std::vector<std::uint32_t> members,
                        double scale, std::size_t m, std::uint64_t seed) {
  // members excludes the center itself
  if (members.size() > m - 1) {
    Rng rng = make_rng(seed, center);
    for (std::size_t i = 0; i < m - 1; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, members.size() - 1);
      std::swap(members[i], members[pick(rng)]);
    }
    members.resize(m - 1);
  }
  std::sort(members.begin(), members.end());

  Patch patch;
  patch.center_index = center;
  patch.centroid_offset = cloud[center];
  patch.points.reserve(m);
  patch.points.push_back({0.0, 0.0, 0.0});
  for (std::uint32_t idx : members) {
    const Point3 d = cloud[idx] - cloud[center];
    scale = std::max(scale, norm(d));
  }
  patch.scale = scale;
  for (std::uint32_t idx : members) patch.points.push_back((cloud[idx] - cloud[center]) / scale);
  patch.points.resize(m, Point3{0.0, 0.0, 0.0});  // pad with the center
  return patch;
}

}  // namespace detail

/// Patch extraction over a fixed cloud; owns the spatial index so repeated
/// extraction does not rebuild it.
class PatchExtractor {
 public:
  PatchExtractor(const PointCloud& cloud, PatchOptions options)
      : index_(std::make_shared<const SpatialIndex>(cloud)), options_(options) {
    detail::require(options_.radius > 0.0, "extract_patch: radius must be positive");
    detail::require(options_.points >= 1, "extract_patch: patch size must be at least 1");
  }

  [[nodiscard]] const PatchOptions& options() const { return options_; }
  [[nodiscard]] const SpatialIndex& index() const { return *index_; }
  [[nodiscard]] std::size_t cloud_size() const { return index_->size(); }

  [[nodiscard]] Patch extract(std::size_t center, std::uint64_t seed) const {
    const auto& pts = index_->points();
    if (center >= pts.size()) {
      throw InvalidArgument("extract_patch: center index " + std::to_string(center) + " out of range (cloud has " +
                            std::to_string(pts.size()) + " points)");
    }
    std::vector<Neighbor> found = index_->radius_search(pts[center], options_.radius);
    if (options_.min_neighbors > 0 && found.size() < options_.min_neighbors + 1) {
      found = index_->knn(pts[center], options_.min_neighbors + 1);
    }
    std::vector<std::uint32_t> members;
    members.reserve(found.size());
    bool dropped_center = false;
    for (const Neighbor& n : found) {
      if (n.index == center) {
        dropped_center = true;
        continue;
      }
      members.push_back(n.index);
    }
    // knn on a duplicated point can return a twin instead of the center
    if (!dropped_center && options_.min_neighbors > 0 && members.size() > options_.min_neighbors) {
      members.pop_back();
    }
    return detail::make_patch(pts, center, std::move(members), options_.radius, options_.points, seed);
  }

 private:
  std::shared_ptr<const SpatialIndex> index_;
  PatchOptions options_;
};

[[nodiscard]] inline Patch extract_patch(const PointCloud& cloud, std::size_t center_index, double radius,
                                         std::size_t m, std::uint64_t seed) {
  return PatchExtractor(cloud, PatchOptions{radius, m, 0}).extract(center_index, seed);
}

}  // namespace pcclean
