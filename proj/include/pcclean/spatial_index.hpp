// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact k-d tree over a static point set. Query results are ordered by
// (squared distance, point index), so equal distances resolve to the lower
// index and the output matches an exhaustive scan element for element.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <vector>

#include "pcclean/geometry.hpp"

namespace pcclean {

struct Neighbor {
  std::uint32_t index = 0;
  double squared_distance = 0.0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    if (a.squared_distance != b.squared_distance) return a.squared_distance < b.squared_distance;
    return a.index < b.index;
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

class SpatialIndex {
 public:
  static constexpr std::size_t kLeafSize = 12;

  explicit SpatialIndex(std::span<const Point3> points) : points_(points.begin(), points.end()) {
    if (points_.empty()) throw DataError("build_spatial_index: point cloud is empty");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::uint32_t{0});
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, order_.size());
  }

  explicit SpatialIndex(const PointCloud& cloud)
      : SpatialIndex(std::span<const Point3>(cloud.points)) {}

  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] const std::vector<Point3>& points() const { return points_; }

  /// The min(k, n) nearest points to `query`, nearest first.
  [[nodiscard]] std::vector<Neighbor> knn(Point3 query, std::size_t k) const {
    k = std::min(k, points_.size());
    std::vector<Neighbor> heap;
    if (k == 0) return heap;
    heap.reserve(k + 1);
    knn_recurse(0, query, k, heap);
    std::sort_heap(heap.begin(), heap.end());
    return heap;
  }

  /// Every point with squared distance <= radius^2, nearest first.
  [[nodiscard]] std::vector<Neighbor> radius_search(Point3 query, double radius) const {
    std::vector<Neighbor> out;
    if (radius < 0.0) return out;
    radius_recurse(0, query, radius * radius, out);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
  };

  std::uint32_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end), 0, 0, -1, 0.0});
    if (end - begin <= kLeafSize) return id;

    Point3 lo = points_[order_[begin]];
    Point3 hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      const Point3& p = points_[order_[i]];
      for (std::size_t d = 0; d < 3; ++d) {
        lo[d] = std::min(lo[d], p[d]);
        hi[d] = std::max(hi[d], p[d]);
      }
    }
    const Point3 ext = hi - lo;
    int axis = 0;
    if (ext.y > ext[axis]) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    if (ext[axis] == 0.0) return id;  // all points coincide

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
    const double split = points_[order_[mid]][axis];
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    Node& node = nodes_[id];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  void visit_leaf_knn(const Node& node, Point3 query, std::size_t k, std::vector<Neighbor>& heap) const {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const Neighbor cand{idx, squared_distance(points_[idx], query)};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
  }

  void knn_recurse(std::uint32_t id, Point3 query, std::size_t k, std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      visit_leaf_knn(node, query, k, heap);
      return;
    }
    const double diff = query[static_cast<std::size_t>(node.axis)] - node.split;
    const std::uint32_t near = diff < 0.0 ? node.left : node.right;
    const std::uint32_t far = diff < 0.0 ? node.right : node.left;
    knn_recurse(near, query, k, heap);
    // Visit on equality: a far-side point at exactly the current worst
    // distance may still win on index.
    if (heap.size() < k || diff * diff <= heap.front().squared_distance) {
      knn_recurse(far, query, k, heap);
    }
  }

  void radius_recurse(std::uint32_t id, Point3 query, double r2, std::vector<Neighbor>& out) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        const double d2 = squared_distance(points_[idx], query);
        if (d2 <= r2) out.push_back({idx, d2});
      }
      return;
    }
    const double diff = query[static_cast<std::size_t>(node.axis)] - node.split;
    const std::uint32_t near = diff < 0.0 ? node.left : node.right;
    const std::uint32_t far = diff < 0.0 ? node.right : node.left;
    radius_recurse(near, query, r2, out);
    if (diff * diff <= r2) radius_recurse(far, query, r2, out);
  }

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

[[nodiscard]] inline SpatialIndex build_spatial_index(const PointCloud& cloud) {
  return SpatialIndex(cloud);
}

}  // namespace pcclean
