// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Chamfer distance, precision-recall curves and average precision.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcclean/geometry.hpp"
#include "pcclean/spatial_index.hpp"

namespace pcclean {

namespace detail {

inline double mean_nearest_squared(const std::vector<Point3>& from, const SpatialIndex& to) {
  double s = 0.0;
  for (const Point3& p : from) s += to.knn(p, 1).front().squared_distance;
  return s / static_cast<double>(from.size());
}

}  // namespace detail

/// Mean squared nearest distance from A to B plus the same from B to A.
[[nodiscard]] inline double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  require_non_empty(a, "chamfer_distance");
  require_non_empty(b, "chamfer_distance");
  const SpatialIndex ia(a);
  const SpatialIndex ib(b);
  return detail::mean_nearest_squared(a.points, ib) + detail::mean_nearest_squared(b.points, ia);
}

struct PRPoint {
  double threshold = 0.0;  ///< the distinct score value; points scoring >= it are positive
  double recall = 0.0;
  double precision = 1.0;
};

/// Sweep from the highest to the lowest distinct score. The curve opens with
/// the (recall 0, precision 1) point, whose threshold is +infinity.
struct PRCurve {
  std::vector<PRPoint> points;
  std::size_t positives = 0;
};

[[nodiscard]] inline PRCurve precision_recall_curve(std::span<const double> scores,
                                                    std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("precision_recall_curve: " + std::to_string(scores.size()) + " scores but " +
                          std::to_string(labels.size()) + " labels");
  }
  PRCurve curve;
  for (auto l : labels) curve.positives += l ? 1 : 0;
  if (curve.positives == 0) throw InvalidArgument("precision_recall_curve: no positive labels, recall is undefined");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  const auto total_pos = static_cast<double>(curve.positives);
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      if (labels[order[i]]) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    curve.points.push_back(
        {s, static_cast<double>(tp) / total_pos, static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  return curve;
}

/// Step-wise average precision: sum over the sweep of (R_i - R_{i-1}) * P_i.
[[nodiscard]] inline double aupr(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const PRCurve c = precision_recall_curve(scores, labels);
  double area = 0.0;
  for (std::size_t i = 1; i < c.points.size(); ++i) {
    area += (c.points[i].recall - c.points[i - 1].recall) * c.points[i].precision;
  }
  return std::clamp(area, 0.0, 1.0);
}

/// "threshold,recall,precision" rows with a header line.
inline void write_pr_curve_csv(std::ostream& out, const PRCurve& curve) {
  out << "threshold,recall,precision\n";
  char buf[96];
  for (const PRPoint& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.threshold, p.recall, p.precision);
    out << buf;
  }
}

/// Ordered "key = value" report lines.
class MetricReport {
 public:
  MetricReport& add(std::string key, std::string value) {
    rows_.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  MetricReport& add(std::string key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return add(std::move(key), std::string(buf));
  }
  MetricReport& add(std::string key, std::size_t value) { return add(std::move(key), std::to_string(value)); }

  [[nodiscard]] std::string str() const {
    std::string s;
    for (const auto& [k, v] : rows_) s += k + " = " + v + "\n";
    return s;
  }
  [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::pair<std::string, std::string>> rows_;
};

}  // namespace pcclean
