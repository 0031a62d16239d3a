// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0
//
// Stage 1: per-point outlier probabilities, thresholding, removal and
// detector training.

#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <numeric>
#include <cstdint>
#include <iostream>
#include <span>
#include <string>
#include <vector>

#include "pcclean/network/forward.hpp"
#include "pcclean/patch.hpp"
#include "pcclean/training.hpp"

namespace pcclean {

inline constexpr double kDefaultOutlierThreshold = 0.5;

struct OutlierDecision {
  std::vector<double> probability;
  std::vector<std::uint8_t> is_outlier;
  double threshold = kDefaultOutlierThreshold;

  /// Flags exactly the points whose probability is strictly above threshold.
  [[nodiscard]] static OutlierDecision from_probabilities(std::vector<double> probs, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("outlier threshold must lie in [0, 1]");
    OutlierDecision d;
    d.threshold = threshold;
    d.is_outlier.reserve(probs.size());
    for (double p : probs) d.is_outlier.push_back(p > threshold ? 1 : 0);
    d.probability = std::move(probs);
    return d;
  }

  [[nodiscard]] std::size_t outlier_count() const {
    std::size_t n = 0;
    for (auto f : is_outlier) n += f;
    return n;
  }
};

/// Patch options for per-point inference with `model`: fallback to the k
/// nearest points when the ball is too sparse.
[[nodiscard]] inline PatchOptions inference_patch_options(const PointCloud& cloud, const ModelConfig& cfg,
                                                          std::size_t patch_points,
                                                          double radius_fraction = PatchOptions::kDefaultRadiusFraction) {
  if (patch_points <= cfg.k) {
    throw InvalidArgument("patch size " + std::to_string(patch_points) + " must exceed k=" + std::to_string(cfg.k));
  }
  return {PatchOptions::radius_for(cloud, radius_fraction), patch_points, cfg.k};
}

struct InferenceOptions {
  std::size_t patch_points = 500;
  double radius_fraction = PatchOptions::kDefaultRadiusFraction;
  std::uint64_t seed = 0;  ///< patch subsampling
};

[[nodiscard]] inline std::vector<double> outlier_probabilities(const PointCloud& cloud, const Model& model,
                                                               const InferenceOptions& opt = {}) {
  if (cloud.size() < model.config.k + 1) {
    throw DataError("classify_outliers: cloud has " + std::to_string(cloud.size()) + " points, need at least k+1=" +
                    std::to_string(model.config.k + 1));
  }
  const PatchExtractor extractor(cloud, inference_patch_options(cloud, model.config, opt.patch_points, opt.radius_fraction));
  std::vector<double> probs(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    probs[i] = predict_outlier_probability(extractor.extract(i, opt.seed), model);
  }
  return probs;
}

[[nodiscard]] inline OutlierDecision classify_outliers(const PointCloud& cloud, const Model& model,
                                                       double threshold = kDefaultOutlierThreshold,
                                                       const InferenceOptions& opt = {}) {
  if (model.kind != ModelKind::Detector) throw InvalidArgument("classify_outliers: model is not a detector");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidArgument("outlier threshold must lie in [0, 1]");
  return OutlierDecision::from_probabilities(outlier_probabilities(cloud, model, opt), threshold);
}

/// Drops flagged points, keeping survivors (and their labels) in order.
[[nodiscard]] inline PointCloud remove_outliers(const PointCloud& cloud, const OutlierDecision& decision) {
  if (decision.is_outlier.size() != cloud.size()) {
    throw InvalidArgument("remove_outliers: decision covers " + std::to_string(decision.is_outlier.size()) +
                          " points, cloud has " + std::to_string(cloud.size()));
  }
  PointCloud out;
  if (cloud.labels) out.labels.emplace();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (decision.is_outlier[i]) continue;
    out.points.push_back(cloud.points[i]);
    if (cloud.labels) out.labels->push_back((*cloud.labels)[i]);
  }
  return out;
}

/// L1 distance between predicted probability and the 0/1 label.
[[nodiscard]] inline double detector_loss(double predicted, int label) {
  return std::abs(predicted - static_cast<double>(label));
}

[[nodiscard]] inline double mean_detector_loss(std::span<const double> predicted, std::span<const std::uint8_t> labels) {
  detail::require(predicted.size() == labels.size() && !predicted.empty(), "mean_detector_loss: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) s += detector_loss(predicted[i], labels[i]);
  return s / static_cast<double>(predicted.size());
}

struct DetectorSample {
  Patch patch;
  std::uint8_t label = 0;
};

/// Differentiable L1 loss of one sample.
inline ad::Tensor detector_sample_loss(ad::Tape& tape, const DetectorSample& s, const Model& model) {
  const ad::Tensor p = detector_forward(tape, s.patch, model);
  const double target = -static_cast<double>(s.label);
  return ad::sum(tape, ad::abs(tape, ad::add_constant(tape, p, std::span<const double>(&target, 1))));
}

/// Up to `count` (patch, center label) pairs from a labeled cloud; centers are
/// drawn uniformly without replacement.
[[nodiscard]] inline std::vector<DetectorSample> detector_samples(const PointCloud& cloud, const ModelConfig& cfg,
                                                                  std::size_t patch_points, std::size_t count,
                                                                  std::uint64_t seed,
                                                                  double radius_fraction = PatchOptions::kDefaultRadiusFraction) {
  if (!cloud.labels) throw DataError("detector training needs a labeled cloud");
  const PatchExtractor extractor(cloud, inference_patch_options(cloud, cfg, patch_points, radius_fraction));
  std::vector<std::size_t> centers(cloud.size());
  std::iota(centers.begin(), centers.end(), std::size_t{0});
  Rng rng = make_rng(seed, 0xD37EC7);
  std::shuffle(centers.begin(), centers.end(), rng);
  centers.resize(std::min(count, centers.size()));
  std::vector<DetectorSample> out;
  out.reserve(centers.size());
  for (std::size_t c : centers) out.push_back({extractor.extract(c, seed), (*cloud.labels)[c]});
  return out;
}

struct TrainedModel {
  Model model;
  std::vector<EpochLoss> log;
};

/// Trains a freshly initialized detector (hyper.init) unless `init` is supplied.
[[nodiscard]] inline TrainedModel train_detector(const std::vector<DetectorSample>& data, const ModelConfig& cfg,
                                                 const TrainHyper& hyper, const EpochCallback& on_epoch = {},
                                                 const Model* init = nullptr) {
  if (data.empty()) throw DataError("train_detector: dataset is empty");
  std::size_t positives = 0;
  for (const auto& s : data) positives += s.label ? 1 : 0;
  if (positives == 0 || positives == data.size()) {
    std::cerr << "warning: train_detector: dataset has a single class (" << positives << " outliers of "
              << data.size() << " samples)\n";
  }
  Model model = init ? Model{init->kind, init->config, init->params.clone()}
                     : make_model(ModelKind::Detector, cfg, hyper.init, hyper.seed);
  auto log = sgd_train(
      model, data.size(), hyper,
      [&](ad::Tape& tape, std::size_t i) { return detector_sample_loss(tape, data[i], model); }, on_epoch);
  return {std::move(model), std::move(log)};
}

}  // namespace pcclean
