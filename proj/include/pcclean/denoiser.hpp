// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Stage 2: per-point displacement estimation, its application, the
// nearest/farthest neighborhood losses and denoiser training.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcclean/detector.hpp"
#include "pcclean/network/forward.hpp"
#include "pcclean/patch.hpp"
#include "pcclean/training.hpp"

namespace pcclean {

inline constexpr double kDefaultAlpha = 0.99;
inline constexpr std::size_t kGroundTruthCap = 100;

/// Clean-cloud points that form the target neighborhood of one noisy point.
struct GroundTruthNeighborhood {
  std::vector<Point3> points;
};

namespace detail {

inline void require_neighborhood(const GroundTruthNeighborhood& n, const char* op) {
  if (n.points.empty()) throw InvalidArgument(std::string(op) + ": ground-truth neighborhood is empty");
}

// First index attaining the min (want_max = false) or max squared distance.
inline std::size_t select_extreme(Point3 p, const GroundTruthNeighborhood& n, bool want_max) {
  std::size_t best = 0;
  double best_d = squared_distance(p, n.points[0]);
  for (std::size_t j = 1; j < n.points.size(); ++j) {
    const double d = squared_distance(p, n.points[j]);
    if (want_max ? d > best_d : d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

}  // namespace detail

/// Squared distance to the nearest neighborhood point.
[[nodiscard]] inline double loss_s(Point3 p, const GroundTruthNeighborhood& n) {
  detail::require_neighborhood(n, "loss_s");
  return squared_distance(p, n.points[detail::select_extreme(p, n, false)]);
}

/// Squared distance to the farthest neighborhood point.
[[nodiscard]] inline double loss_r(Point3 p, const GroundTruthNeighborhood& n) {
  detail::require_neighborhood(n, "loss_r");
  return squared_distance(p, n.points[detail::select_extreme(p, n, true)]);
}

[[nodiscard]] inline double loss_alpha(Point3 p, const GroundTruthNeighborhood& n, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("loss_alpha: alpha must lie in [0, 1]");
  return alpha * loss_s(p, n) + (1.0 - alpha) * loss_r(p, n);
}

/// Differentiable loss_alpha of `predicted` (1, 3). The nearest and farthest
/// points are selected on the forward values and held constant.
inline ad::Tensor loss_alpha(ad::Tape& tape, const ad::Tensor& predicted, const GroundTruthNeighborhood& n,
                             double alpha) {
  detail::require_neighborhood(n, "loss_alpha");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("loss_alpha: alpha must lie in [0, 1]");
  const auto v = predicted.values();
  const Point3 p{v[0], v[1], v[2]};
  auto term = [&](std::size_t j) {
    const Point3 t = n.points[j];
    const double neg[3] = {-t.x, -t.y, -t.z};
    return ad::sum(tape, ad::square(tape, ad::add_constant(tape, predicted, neg)));
  };
  const ad::Tensor ls = term(detail::select_extreme(p, n, false));
  const ad::Tensor lr = term(detail::select_extreme(p, n, true));
  return ad::add(tape, ad::scale(tape, ls, alpha), ad::scale(tape, lr, 1.0 - alpha));
}

/// Predicted world displacement for every point of the cloud.
[[nodiscard]] inline std::vector<Point3> displacements(const PointCloud& cloud, const Model& model,
                                                       const InferenceOptions& opt = {}) {
  if (model.kind != ModelKind::Denoiser) throw InvalidArgument("apply_denoise: model is not a denoiser");
  if (cloud.size() <= model.config.k) {
    throw DataError("apply_denoise: cloud has " + std::to_string(cloud.size()) + " points, need more than k=" +
                    std::to_string(model.config.k));
  }
  const PatchExtractor extractor(cloud, inference_patch_options(cloud, model.config, opt.patch_points, opt.radius_fraction));
  std::vector<Point3> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) out[i] = predict_displacement(extractor.extract(i, opt.seed), model);
  return out;
}

/// p_i + d_i for every point; count, order and labels are preserved.
[[nodiscard]] inline PointCloud apply_displacements(const PointCloud& cloud, std::span<const Point3> d) {
  detail::require(d.size() == cloud.size(), "apply_displacements: size mismatch");
  PointCloud out = cloud;
  for (std::size_t i = 0; i < out.size(); ++i) out.points[i] += d[i];
  return out;
}

[[nodiscard]] inline PointCloud apply_denoise(const PointCloud& cloud, const Model& model,
                                              const InferenceOptions& opt = {}) {
  const std::vector<Point3> d = displacements(cloud, model, opt);
  return apply_displacements(cloud, d);
}

struct DenoiserSample {
  Patch patch;  ///< around the noisy point; centroid_offset is its world position
  GroundTruthNeighborhood target;
};

inline ad::Tensor denoiser_sample_loss(ad::Tape& tape, const DenoiserSample& s, const Model& model, double alpha) {
  const ad::Tensor f = denoiser_forward(tape, s.patch, model);
  const Point3 c = s.patch.centroid_offset;
  const double center[3] = {c.x, c.y, c.z};
  return loss_alpha(tape, ad::add_constant(tape, f, center), s.target, alpha);
}

/// Training pairs from an index-aligned (noisy, clean) pair: noisy point i
/// derives from clean point i. Points labeled as outliers are skipped. The
/// target neighborhood is the clean points within the patch radius of clean
/// point i, capped at the kGroundTruthCap nearest.
[[nodiscard]] inline std::vector<DenoiserSample> denoiser_samples(const PointCloud& noisy, const PointCloud& clean,
                                                                  const ModelConfig& cfg, std::size_t patch_points,
                                                                  std::size_t count, std::uint64_t seed,
                                                                  double radius_fraction = PatchOptions::kDefaultRadiusFraction) {
  if (noisy.size() != clean.size()) {
    throw DataError("denoiser training data is unpaired: noisy cloud has " + std::to_string(noisy.size()) +
                    " points, clean cloud " + std::to_string(clean.size()));
  }
  require_non_empty(clean, "denoiser_samples");
  const PatchOptions popt = inference_patch_options(noisy, cfg, patch_points, radius_fraction);
  const PatchExtractor extractor(noisy, popt);
  const SpatialIndex clean_index(clean);
  std::vector<std::size_t> centers;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    if (!noisy.labels || (*noisy.labels)[i] == 0) centers.push_back(i);
  }
  Rng rng = make_rng(seed, 0xDE7015E);
  std::shuffle(centers.begin(), centers.end(), rng);
  centers.resize(std::min(count, centers.size()));

  std::vector<DenoiserSample> out;
  out.reserve(centers.size());
  for (std::size_t c : centers) {
    std::vector<Neighbor> nb = clean_index.radius_search(clean[c], popt.radius);
    if (nb.size() > kGroundTruthCap) nb.resize(kGroundTruthCap);
    GroundTruthNeighborhood target;
    for (const Neighbor& x : nb) target.points.push_back(clean[x.index]);
    out.push_back({extractor.extract(c, seed), std::move(target)});
  }
  return out;
}

/// Trains a freshly initialized denoiser (hyper.init) unless `init` is supplied.
[[nodiscard]] inline TrainedModel train_denoiser(const std::vector<DenoiserSample>& data, const ModelConfig& cfg,
                                                 const TrainHyper& hyper, double alpha = kDefaultAlpha,
                                                 const EpochCallback& on_epoch = {}, const Model* init = nullptr) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("train_denoiser: alpha must lie in [0, 1]");
  if (data.empty()) throw DataError("train_denoiser: dataset is empty");
  Model model = init ? Model{init->kind, init->config, init->params.clone()}
                     : make_model(ModelKind::Denoiser, cfg, hyper.init, hyper.seed);
  auto log = sgd_train(
      model, data.size(), hyper,
      [&](ad::Tape& tape, std::size_t i) { return denoiser_sample_loss(tape, data[i], model, alpha); }, on_epoch);
  return {std::move(model), std::move(log)};
}

}  // namespace pcclean
