// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// k-nearest-neighbor graphs in arbitrary feature spaces and the edge
// features (x_i, x_j - x_i) consumed by graph convolution.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcclean/errors.hpp"

namespace pcclean {

/// Row-major real matrix: rows are nodes, columns are feature channels.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  FeatureMatrix(std::size_t r, std::size_t c, std::vector<double> values)
      : rows(r), cols(c), data(std::move(values)) {
    detail::require(data.size() == rows * cols, "FeatureMatrix: value count does not match shape");
  }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  [[nodiscard]] std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct NeighborGraph {
  std::size_t k = 0;
  std::size_t nodes = 0;
  std::vector<std::uint32_t> neighbors;  ///< nodes * k, row i lists node i's neighbors nearest first

  [[nodiscard]] std::span<const std::uint32_t> of(std::size_t node) const {
    return {neighbors.data() + node * k, k};
  }
  friend bool operator==(const NeighborGraph&, const NeighborGraph&) = default;
};

/// For each node, the k other nodes nearest in Euclidean feature distance,
/// ties broken by lower index. Self-loops are never produced.
[[nodiscard]] inline NeighborGraph knn_graph(const FeatureMatrix& features, std::size_t k) {
  const std::size_t n = features.rows;
  if (k < 1) throw InvalidArgument("knn_graph: k must be at least 1");
  if (n <= k) {
    throw InvalidArgument("knn_graph: need more than k=" + std::to_string(k) + " nodes, got " + std::to_string(n));
  }
  const std::size_t c = features.cols;
  const double* x = features.data.data();

  // Full pairwise table: each distance is computed once and reused for both
  // endpoints so the (i, j) and (j, i) entries are bitwise equal.
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * c;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* xj = x + j * c;
      double s = 0.0;
      for (std::size_t d = 0; d < c; ++d) {
        const double diff = xi[d] - xj[d];
        s += diff * diff;
      }
      dist[i * n + j] = s;
      dist[j * n + i] = s;
    }
  }

  NeighborGraph g{k, n, std::vector<std::uint32_t>(n * k)};
  std::vector<std::uint32_t> cand(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = dist.data() + i * n;
    std::size_t w = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cand[w++] = static_cast<std::uint32_t>(j);
    }
    auto closer = [row](std::uint32_t a, std::uint32_t b) {
      return row[a] < row[b] || (row[a] == row[b] && a < b);
    };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(), closer);
    std::copy_n(cand.begin(), k, g.neighbors.begin() + static_cast<std::ptrdiff_t>(i * k));
  }
  return g;
}

/// Dense edge-feature tensor of shape (nodes, k, 2 * channels).
struct EdgeFeatureTensor {
  std::size_t nodes = 0;
  std::size_t k = 0;
  std::size_t channels = 0;  ///< 2 * input channels
  std::vector<double> data;

  double operator()(std::size_t i, std::size_t j, std::size_t c) const {
    return data[(i * k + j) * channels + c];
  }
};

namespace detail {

/// Shared kernel for the value-level and differentiable edge-feature ops.
inline void fill_edge_features(const double* x, std::size_t n, std::size_t c, const NeighborGraph& g,
                               double* out) {
  const std::size_t k = g.k;
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x + i * c;
    for (std::size_t s = 0; s < k; ++s) {
      const double* xj = x + static_cast<std::size_t>(g.neighbors[i * k + s]) * c;
      double* e = out + (i * k + s) * 2 * c;
      for (std::size_t d = 0; d < c; ++d) {
        e[d] = xi[d];
        e[c + d] = xj[d] - xi[d];
      }
    }
  }
}

}  // namespace detail

[[nodiscard]] inline EdgeFeatureTensor edge_features(const FeatureMatrix& x, const NeighborGraph& g) {
  if (g.nodes != x.rows) {
    throw InvalidArgument("edge_features: graph has " + std::to_string(g.nodes) + " nodes, features have " +
                          std::to_string(x.rows) + " rows");
  }
  EdgeFeatureTensor out{x.rows, g.k, 2 * x.cols, std::vector<double>(x.rows * g.k * 2 * x.cols)};
  detail::fill_edge_features(x.data.data(), x.rows, x.cols, g, out.data.data());
  return out;
}

}  // namespace pcclean
