// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Points, point clouds and axis-aligned bounding boxes.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pcclean/errors.hpp"

namespace pcclean {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Point3 operator*(Point3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Point3 operator*(double s, Point3 a) { return a * s; }
  friend constexpr Point3 operator/(Point3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  friend constexpr bool operator==(Point3 a, Point3 b) = default;

  Point3& operator+=(Point3 o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  [[nodiscard]] bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

[[nodiscard]] constexpr double dot(Point3 a, Point3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

[[nodiscard]] constexpr Point3 cross(Point3 a, Point3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

/// Squared Euclidean distance. Every nearest-neighbor routine in the library
/// uses this exact expression so that tie-breaking is reproducible.
[[nodiscard]] constexpr double squared_distance(Point3 a, Point3 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

[[nodiscard]] inline double norm(Point3 a) { return std::sqrt(dot(a, a)); }

/// Ordered point list with optional per-point binary outlier labels
/// (1 = outlier).
struct PointCloud {
  std::vector<Point3> points;
  std::optional<std::vector<std::uint8_t>> labels;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}
  PointCloud(std::vector<Point3> pts, std::vector<std::uint8_t> lbl)
      : points(std::move(pts)), labels(std::move(lbl)) {
    validate();
  }

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] bool empty() const { return points.empty(); }
  [[nodiscard]] bool has_labels() const { return labels.has_value(); }
  const Point3& operator[](std::size_t i) const { return points[i]; }

  /// Throws DataError on non-finite coordinates or mismatched label count.
  void validate() const {
    if (labels && labels->size() != points.size()) {
      throw DataError("label count " + std::to_string(labels->size()) +
                      " does not match point count " + std::to_string(points.size()));
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].finite()) throw DataError("non-finite coordinate at point " + std::to_string(i));
    }
  }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

inline void require_non_empty(const PointCloud& cloud, const char* what) {
  if (cloud.empty()) throw DataError(std::string(what) + ": point cloud is empty");
}

struct BoundingBox {
  Point3 min;
  Point3 max;

  [[nodiscard]] Point3 extent() const { return max - min; }
  [[nodiscard]] Point3 center() const { return (min + max) * 0.5; }
  [[nodiscard]] double diagonal() const { return norm(max - min); }

  /// Box scaled by `factor` about its center.
  [[nodiscard]] BoundingBox expanded(double factor) const {
    const Point3 c = center();
    const Point3 half = extent() * (0.5 * factor);
    return {c - half, c + half};
  }

  [[nodiscard]] bool contains(Point3 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
};

[[nodiscard]] inline BoundingBox bounding_box(std::span<const Point3> points) {
  if (points.empty()) throw DataError("bounding_box: point cloud is empty");
  BoundingBox box{points.front(), points.front()};
  for (const Point3& p : points.subspan(1)) {
    for (std::size_t d = 0; d < 3; ++d) {
      box.min[d] = std::min(box.min[d], p[d]);
      box.max[d] = std::max(box.max[d], p[d]);
    }
  }
  return box;
}

[[nodiscard]] inline BoundingBox bounding_box(const PointCloud& cloud) {
  return bounding_box(std::span<const Point3>(cloud.points));
}

}  // namespace pcclean
