// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"

namespace pcclean {
namespace {

using testing_support::jitter;
using testing_support::tiny_config;

TEST(Decision, ThresholdIsStrict) {
  const auto d = OutlierDecision::from_probabilities({0.6, 0.5, 0.4999, 1.0, 0.0}, 0.5);
  EXPECT_EQ(d.is_outlier, (std::vector<std::uint8_t>{1, 0, 0, 1, 0}));
  EXPECT_EQ(d.outlier_count(), 2u);
}

TEST(Decision, AllZeroProbabilitiesFlagNothing) {
  EXPECT_EQ(OutlierDecision::from_probabilities(std::vector<double>(10, 0.0), 0.5).outlier_count(), 0u);
}

TEST(Decision, MonotoneInThreshold) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  std::vector<double> p(300);
  for (double& v : p) v = u(rng);
  for (int s = 0; s < 19; ++s) {
    const double t1 = 0.05 * s;
    const auto a = OutlierDecision::from_probabilities(p, t1);
    const auto b = OutlierDecision::from_probabilities(p, t1 + 0.05);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_LE(b.is_outlier[i], a.is_outlier[i]);
  }
}

TEST(Decision, ThresholdOutOfRangeThrows) {
  EXPECT_THROW((void)OutlierDecision::from_probabilities({0.1}, 1.5), InvalidArgument);
}

TEST(RemoveOutliers, NothingFlaggedIsIdentity) {
  const PointCloud c = testing_oracles::random_cloud(50, 1);
  EXPECT_EQ(remove_outliers(c, OutlierDecision::from_probabilities(std::vector<double>(50, 0.0), 0.5)), c);
}

TEST(RemoveOutliers, AllFlaggedGivesEmptyCloud) {
  const PointCloud c = testing_oracles::random_cloud(20, 1);
  const PointCloud out = remove_outliers(c, OutlierDecision::from_probabilities(std::vector<double>(20, 1.0), 0.5));
  EXPECT_TRUE(out.empty());
  EXPECT_THROW(require_non_empty(out, "downstream"), DataError);
}

TEST(RemoveOutliers, MatchesOrderedFilterOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud c = testing_oracles::random_cloud(100, trial);
    c.labels = std::vector<std::uint8_t>(100);
    OutlierDecision d;
    for (std::size_t i = 0; i < 100; ++i) {
      d.is_outlier.push_back(rng() % 2);
      (*c.labels)[i] = rng() % 2;
    }
    const PointCloud out = remove_outliers(c, d);
    PointCloud want;
    want.labels.emplace();
    for (std::size_t i = 0; i < 100; ++i) {
      if (d.is_outlier[i]) continue;
      want.points.push_back(c[i]);
      want.labels->push_back((*c.labels)[i]);
    }
    EXPECT_EQ(out, want);
    EXPECT_EQ(out.size(), 100 - d.outlier_count());
  }
}

TEST(RemoveOutliers, SizeMismatchThrows) {
  OutlierDecision d;
  d.is_outlier = {0, 1};
  EXPECT_THROW((void)remove_outliers(testing_oracles::random_cloud(3, 0), d), InvalidArgument);
}

TEST(DetectorLoss, Examples) {
  EXPECT_NEAR(detector_loss(0.7, 1), 0.3, 1e-15);
  EXPECT_EQ(detector_loss(0.0, 0), 0.0);
}

TEST(DetectorLoss, MeanMatchesSummation) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  std::vector<double> p(257);
  std::vector<std::uint8_t> l(257);
  double want = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = u(rng);
    l[i] = rng() % 2;
    want += l[i] ? 1.0 - p[i] : p[i];
  }
  EXPECT_NEAR(mean_detector_loss(p, l), want / 257.0, 1e-15);
}

TEST(DetectorLoss, DifferentiableFormAgrees) {
  Model m = make_model(ModelKind::Detector, tiny_config(ModelKind::Detector), InitScheme::He, 1);
  jitter(m, 2, 0.5);
  const Patch p = testing_support::random_patch(24, 3);
  const double prob = predict_outlier_probability(p, m);
  for (std::uint8_t label : {0, 1}) {
    ad::Tape tape(false);
    EXPECT_DOUBLE_EQ(detector_sample_loss(tape, {p, label}, m).item(), detector_loss(prob, label));
  }
}

// Labeled synthetic data: a noisy sphere with scattered outliers.
PointCloud labeled_sphere(std::size_t n, std::uint64_t seed) {
  const Shape s(ShapeKind::Sphere);
  ContaminationSpec spec;
  spec.noise_level = 0.005;
  spec.outlier_fraction = 0.3;
  spec.seed = seed;
  return contaminate(s.sample(n, seed), spec, s).contaminated;
}

TEST(ClassifyOutliers, SmallCloudIsDataError) {
  const Model m = make_model(ModelKind::Detector, tiny_config(ModelKind::Detector), InitScheme::He, 1);
  EXPECT_THROW((void)classify_outliers(testing_oracles::random_cloud(16, 0), m), DataError);
}

TEST(ClassifyOutliers, PointsOutsidePatchDoNotMatter) {
  Model m = make_model(ModelKind::Detector, tiny_config(ModelKind::Detector, GraphConvVariant::Dynamic, 8),
                       InitScheme::He, 4);
  jitter(m, 5, 0.2);
  PointCloud c = testing_oracles::random_cloud(400, 6);
  const InferenceOptions opt{32, 0.05, 0};
  const double r = PatchOptions::radius_for(c, 0.05);
  const auto before = outlier_probabilities(c, m, opt);
  // Remove an interior point: the bounding box (hence the radius) is unchanged.
  const BoundingBox box = bounding_box(c);
  std::size_t j = 0;
  for (; j < c.size(); ++j) {
    const Point3 p = c[j];
    bool on_box = false;
    for (std::size_t d = 0; d < 3; ++d) on_box = on_box || p[d] == box.min[d] || p[d] == box.max[d];
    if (!on_box) break;
  }
  PointCloud smaller = c;
  smaller.points.erase(smaller.points.begin() + static_cast<std::ptrdiff_t>(j));
  ASSERT_EQ(PatchOptions::radius_for(smaller, 0.05), r);
  const auto after = outlier_probabilities(smaller, m, opt);
  const SpatialIndex idx(c);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i == j) continue;
    // j must lie outside i's ball and outside its sparse-fallback set
    if (squared_distance(c[i], c[j]) <= r * r) continue;
    bool in_knn = false;
    for (const Neighbor& nb : idx.knn(c[i], 9)) in_knn = in_knn || nb.index == j;
    if (in_knn) continue;
    EXPECT_EQ(after[i < j ? i : i - 1], before[i]) << i;
    ++checked;
  }
  EXPECT_GT(checked, 300u);
}

TEST(DetectorSamples, LabelsFollowCenters) {
  const PointCloud c = labeled_sphere(500, 1);
  const auto cfg = tiny_config(ModelKind::Detector);
  const auto s = detector_samples(c, cfg, 24, 100, 7);
  ASSERT_EQ(s.size(), 100u);
  for (const auto& x : s) {
    EXPECT_EQ(x.label, (*c.labels)[x.patch.center_index]);
    EXPECT_EQ(x.patch.size(), 24u);
  }
  PointCloud unlabeled = c;
  unlabeled.labels.reset();
  EXPECT_THROW((void)detector_samples(unlabeled, cfg, 24, 10, 0), DataError);
}

std::vector<DetectorSample> small_set() {
  const PointCloud c = labeled_sphere(2000, 2);
  return detector_samples(c, tiny_config(ModelKind::Detector, GraphConvVariant::FixedLowDim, 8), 24, 200, 3);
}

TEST(TrainDetector, ZeroLearningRateLeavesParamsUnchanged) {
  const auto data = small_set();
  const ModelConfig cfg = tiny_config(ModelKind::Detector, GraphConvVariant::FixedLowDim, 8);
  TrainHyper h;
  h.lr = 0.0;
  h.epochs = 3;
  h.seed = 9;
  const Model fresh = make_model(ModelKind::Detector, cfg, h.init, h.seed);
  const TrainedModel t = train_detector(data, cfg, h);
  EXPECT_EQ(ad::encode_checkpoint(to_checkpoint(t.model)), ad::encode_checkpoint(to_checkpoint(fresh)));
}

TEST(TrainDetector, LossDecreasesAndRunIsDeterministic) {
  const auto data = small_set();
  const ModelConfig cfg = tiny_config(ModelKind::Detector, GraphConvVariant::FixedLowDim, 8);
  TrainHyper h;
  h.lr = 0.05;
  h.epochs = 20;
  h.seed = 1;
  std::vector<EpochLoss> seen;
  const TrainedModel a = train_detector(data, cfg, h, [&](const EpochLoss& e) { seen.push_back(e); });
  ASSERT_EQ(a.log.size(), 20u);
  EXPECT_EQ(seen, a.log);
  EXPECT_LT(a.log.back().mean_loss, a.log.front().mean_loss);
  const TrainedModel b = train_detector(data, cfg, h);
  EXPECT_EQ(ad::encode_checkpoint(to_checkpoint(a.model)), ad::encode_checkpoint(to_checkpoint(b.model)));
  std::ostringstream la, lb;
  write_loss_log(la, a.log);
  write_loss_log(lb, b.log);
  EXPECT_EQ(la.str(), lb.str());
  EXPECT_EQ(la.str().substr(0, 2), "1,");
}

TEST(TrainDetector, EmptyDatasetIsDataError) {
  EXPECT_THROW((void)train_detector({}, tiny_config(ModelKind::Detector), TrainHyper{}), DataError);
}

}  // namespace
}  // namespace pcclean
