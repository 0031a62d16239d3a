// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Architecture blocks and the two model forward passes.
//
// Trunk, shared by both models:
//   patch (m, 3)
//   -> quaternion spatial transform: per-point MLP, max pool, MLP -> q -> R;
//      points rotated as p * R
//   -> graph convolutional layer: four local feature networks, each
//      kNN graph -> edge features (x_i, x_j - x_i) -> linear + relu -> max
//      over neighbors
//   -> concat of the four outputs -> linear + relu -> max over nodes
//   -> head: fc0 + relu, residual block, fc1 + relu, residual block, out
// Detector: sigmoid(out), the outlier probability of the center point.
// Denoiser: tanh(out) rotated back by R^T and scaled to world units.

#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "pcclean/autodiff/ops.hpp"
#include "pcclean/graph.hpp"
#include "pcclean/network/params.hpp"
#include "pcclean/patch.hpp"

namespace pcclean {

using Mat3 = std::array<double, 9>;

/// Row-major rotation for the quaternion (w, x, y, z), normalized first.
[[nodiscard]] inline Mat3 quaternion_to_rotation(const std::array<double, 4>& q) {
  const double len = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  if (!(len > 0.0) || !std::isfinite(len)) throw InvalidArgument("quaternion_to_rotation: quaternion has zero norm");
  return ad::detail::unit_quaternion_matrix(q[0] / len, q[1] / len, q[2] / len, q[3] / len);
}

/// (m, 3) constant tensor of the patch's normalized coordinates.
[[nodiscard]] inline ad::Tensor patch_tensor(const Patch& patch) {
  std::vector<double> v;
  v.reserve(patch.points.size() * 3);
  for (const Point3& p : patch.points) {
    v.push_back(p.x);
    v.push_back(p.y);
    v.push_back(p.z);
  }
  return ad::Tensor({patch.points.size(), 3}, std::move(v));
}

[[nodiscard]] inline FeatureMatrix to_features(const ad::Tensor& x) {
  return FeatureMatrix(x.dim(0), x.dim(1), x.value_vector());
}

namespace detail {

inline ad::Tensor dense(ad::Tape& tape, const ad::Tensor& x, const ModelParams& p, const std::string& name) {
  return ad::linear(tape, x, p.at(name + ".w"), p.at(name + ".b"));
}

inline ad::Tensor dense_relu(ad::Tape& tape, const ad::Tensor& x, const ModelParams& p, const std::string& name) {
  return ad::relu(tape, dense(tape, x, p, name));
}

}  // namespace detail

struct QstnOutput {
  ad::Tensor rotated;   ///< (m, 3)
  ad::Tensor rotation;  ///< (3, 3)
};

inline QstnOutput qstn_forward(ad::Tape& tape, const ad::Tensor& points, const ModelParams& params) {
  ad::Tensor h = detail::dense_relu(tape, points, params, "qstn.conv0");
  h = detail::dense_relu(tape, h, params, "qstn.conv1");
  ad::Tensor g = ad::max_over_nodes(tape, h);
  g = detail::dense_relu(tape, g, params, "qstn.fc0");
  const ad::Tensor q = detail::dense(tape, g, params, "qstn.out");
  ad::Tensor r = ad::quaternion_rotation(tape, q);
  return {ad::matmul(tape, points, r), r};
}

struct GraphConvOutput {
  ad::Tensor features;                                         ///< (m, sum of local widths)
  std::vector<ad::Tensor> stage_outputs;                       ///< one per local feature network
  std::vector<std::shared_ptr<const NeighborGraph>> graphs;   ///< graph used by each stage
};

/// Four chained local feature networks over `x`. The FixedLowDim variant
/// builds one graph from `coords` and shares it across all four stages; the
/// Dynamic variant rebuilds the graph from the current features per stage
/// (stage 0 features are the coordinates, so stage 0 agrees across variants).
inline GraphConvOutput graph_conv_layer(ad::Tape& tape, const ad::Tensor& x, const ad::Tensor& coords,
                                        const ModelConfig& cfg, const ModelParams& params) {
  const std::size_t n = x.dim(0);
  if (n <= cfg.k) {
    throw InvalidArgument("graph_conv_layer: need more than k=" + std::to_string(cfg.k) + " points, got " +
                          std::to_string(n));
  }
  GraphConvOutput out;
  std::shared_ptr<const NeighborGraph> fixed;
  if (cfg.variant == GraphConvVariant::FixedLowDim) {
    fixed = std::make_shared<const NeighborGraph>(knn_graph(to_features(coords), cfg.k));
  }
  ad::Tensor h = x;
  for (std::size_t l = 0; l < 4; ++l) {
    std::shared_ptr<const NeighborGraph> g =
        fixed ? fixed : std::make_shared<const NeighborGraph>(knn_graph(to_features(h), cfg.k));
    const ad::Tensor e = ad::edge_features(tape, h, *g);
    const ad::Tensor a = detail::dense_relu(tape, e, params, "gconv.lfn" + std::to_string(l));
    h = ad::max_over_neighbors(tape, a);
    out.stage_outputs.push_back(h);
    out.graphs.push_back(std::move(g));
  }
  out.features = ad::concat_cols(tape, out.stage_outputs);
  return out;
}

/// y = x + F(x) with F = linear -> relu -> linear.
inline ad::Tensor residual_block(ad::Tape& tape, const ad::Tensor& x, const ModelParams& params,
                                 const std::string& name) {
  const ad::Tensor& wa = params.at(name + ".a.w");
  const ad::Tensor& wb = params.at(name + ".b.w");
  const std::size_t width = x.shape().back();
  if (wa.dim(0) != width || wb.dim(1) != width) {
    throw InvalidArgument("residual_block '" + name + "': input width " + std::to_string(width) +
                          " does not match block width " + std::to_string(wa.dim(0)) + " -> " +
                          std::to_string(wb.dim(1)));
  }
  const ad::Tensor f = detail::dense(tape, detail::dense_relu(tape, x, params, name + ".a"), params, name + ".b");
  return ad::add(tape, x, f);
}

struct TrunkOutput {
  ad::Tensor raw;       ///< (1, output_dim), pre-activation
  ad::Tensor rotation;  ///< (3, 3)
  GraphConvOutput conv;
};

inline TrunkOutput trunk_forward(ad::Tape& tape, const Patch& patch, const Model& model) {
  const ModelParams& p = model.params;
  const ad::Tensor pts = patch_tensor(patch);
  QstnOutput q = qstn_forward(tape, pts, p);
  GraphConvOutput conv = graph_conv_layer(tape, q.rotated, q.rotated, model.config, p);
  ad::Tensor g = detail::dense_relu(tape, conv.features, p, "global");
  g = ad::max_over_nodes(tape, g);
  ad::Tensor h = detail::dense_relu(tape, g, p, "head.fc0");
  h = residual_block(tape, h, p, "head.res0");
  h = detail::dense_relu(tape, h, p, "head.fc1");
  h = residual_block(tape, h, p, "head.res1");
  return {detail::dense(tape, h, p, "head.out"), q.rotation, std::move(conv)};
}

/// Outlier probability of the patch center, shape (1, 1).
inline ad::Tensor detector_forward(ad::Tape& tape, const Patch& patch, const Model& model) {
  if (model.kind != ModelKind::Detector) throw InvalidArgument("detector_forward: model is not a detector");
  return ad::sigmoid(tape, trunk_forward(tape, patch, model).raw);
}

/// World-frame displacement of the patch center, shape (1, 3). Its norm is
/// below patch.scale.
inline ad::Tensor denoiser_forward(ad::Tape& tape, const Patch& patch, const Model& model) {
  if (model.kind != ModelKind::Denoiser) throw InvalidArgument("denoiser_forward: model is not a denoiser");
  TrunkOutput t = trunk_forward(tape, patch, model);
  const ad::Tensor bounded = ad::tanh(tape, t.raw);
  const ad::Tensor world = ad::matmul(tape, bounded, ad::transpose(tape, t.rotation));
  return ad::scale(tape, world, patch.scale / std::sqrt(3.0));
}

[[nodiscard]] inline double predict_outlier_probability(const Patch& patch, const Model& model) {
  ad::Tape tape(false);
  return detector_forward(tape, patch, model).item();
}

[[nodiscard]] inline Point3 predict_displacement(const Patch& patch, const Model& model) {
  ad::Tape tape(false);
  const ad::Tensor d = denoiser_forward(tape, patch, model);
  const auto v = d.values();
  return {v[0], v[1], v[2]};
}

}  // namespace pcclean
