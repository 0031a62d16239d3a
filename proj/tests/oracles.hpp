// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used by the tests. Everything here
// is deliberately naive: exhaustive scans and finite differences.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pcclean/autodiff/tensor.hpp"
#include "pcclean/geometry.hpp"
#include "pcclean/graph.hpp"
#include "pcclean/spatial_index.hpp"

namespace pcclean::testing_oracles {

inline PointCloud random_cloud(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  PointCloud c;
  c.points.resize(n);
  for (Point3& p : c.points) p = {u(rng), u(rng), u(rng)};
  return c;
}

inline std::vector<Neighbor> brute_knn(const std::vector<Point3>& pts, Point3 q, std::size_t k) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double dx = pts[i].x - q.x, dy = pts[i].y - q.y, dz = pts[i].z - q.z;
    all.push_back({static_cast<std::uint32_t>(i), dx * dx + dy * dy + dz * dz});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.squared_distance != b.squared_distance ? a.squared_distance < b.squared_distance : a.index < b.index;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

/// Feature-space kNN by full pairwise distance table, self excluded, lower
/// index first on ties.
inline std::vector<std::vector<std::uint32_t>> brute_knn_graph(const std::vector<double>& x, std::size_t n,
                                                               std::size_t d, std::size_t k) {
  std::vector<std::vector<std::uint32_t>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::uint32_t>> row;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double t = x[j * d + c] - x[i * d + c];
        s += t * t;
      }
      row.emplace_back(s, static_cast<std::uint32_t>(j));
    }
    std::sort(row.begin(), row.end());
    for (std::size_t r = 0; r < k; ++r) out[i].push_back(row[r].second);
  }
  return out;
}

inline double brute_chamfer(const std::vector<Point3>& a, const std::vector<Point3>& b) {
  auto one_way = [](const std::vector<Point3>& from, const std::vector<Point3>& to) {
    long double total = 0.0L;
    for (const Point3& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Point3& q : to) {
        const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      total += best;
    }
    return static_cast<double>(total / static_cast<long double>(from.size()));
  };
  return one_way(a, b) + one_way(b, a);
}

/// Average precision by sweeping every distinct score as a threshold
/// (predict positive when score >= t) and summing recall steps times
/// precision.
inline double brute_aupr(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  std::size_t positives = 0;
  for (auto l : labels) positives += l;
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) (labels[i] ? tp : fp) += 1;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

/// Determinant of a row-major 3x3 matrix by cofactor expansion.
inline double det3(const std::array<double, 9>& r) {
  return r[0] * (r[4] * r[8] - r[5] * r[7]) - r[1] * (r[3] * r[8] - r[5] * r[6]) + r[2] * (r[3] * r[7] - r[4] * r[6]);
}

/// Largest entry of |R^T R - I|.
inline double orthogonality_error(const std::array<double, 9>& r) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += r[k * 3 + i] * r[k * 3 + j];
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

inline double brute_min_sq(Point3 p, const std::vector<Point3>& n) {
  double best = std::numeric_limits<double>::infinity();
  for (const Point3& q : n) best = std::min(best, (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.z - q.z) * (p.z - q.z));
  return best;
}

inline double brute_max_sq(Point3 p, const std::vector<Point3>& n) {
  double best = -1.0;
  for (const Point3& q : n) best = std::max(best, (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.z - q.z) * (p.z - q.z));
  return best;
}

struct GradCheck {
  std::string name;
  double relative_error = 0.0;
  std::size_t entries = 0;
};

/// Compares tape gradients of `loss()` w.r.t. each tensor in `wrt` with
/// central differences (step h) over up to `max_entries` entries per tensor.
/// `loss` must rebuild its tape from the current tensor values each call and
/// leave the analytic gradient in the tensors when `backward` is true.
inline std::vector<GradCheck> finite_difference_check(
    const std::function<double(bool backward)>& loss, const std::vector<std::pair<std::string, ad::Tensor>>& wrt,
    double h = 1e-5, std::size_t max_entries = 24, std::uint64_t seed = 0) {
  for (const auto& [_, t] : wrt) t.zero_grad();
  loss(true);
  std::vector<GradCheck> out;
  std::mt19937_64 rng(seed);
  for (const auto& [name, t] : wrt) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    std::vector<std::size_t> idx(t.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(max_entries, idx.size()));
    double diff = 0.0, na = 0.0, nn = 0.0;
    auto v = t.mutable_values();
    for (std::size_t i : idx) {
      const double orig = v[i];
      v[i] = orig + h;
      const double up = loss(false);
      v[i] = orig - h;
      const double down = loss(false);
      v[i] = orig;
      const double numeric = (up - down) / (2 * h);
      diff += (numeric - analytic[i]) * (numeric - analytic[i]);
      na += analytic[i] * analytic[i];
      nn += numeric * numeric;
    }
    const double denom = std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
    out.push_back({name, std::sqrt(diff) / denom, idx.size()});
  }
  return out;
}

}  // namespace pcclean::testing_oracles
