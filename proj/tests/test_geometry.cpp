// Copyright 2026 The pcclean Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pcclean/geometry.hpp"
#include "pcclean/patch.hpp"
#include "pcclean/spatial_index.hpp"

namespace pcclean {
namespace {

TEST(BoundingBox, UnitCubeCorners) {
  PointCloud c;
  for (int i = 0; i < 8; ++i) c.points.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
  EXPECT_NEAR(bounding_box(c).diagonal(), std::sqrt(3.0), 1e-15);
}

TEST(BoundingBox, SinglePointIsDegenerate) {
  PointCloud c;
  c.points.push_back({2, 3, 4});
  const BoundingBox b = bounding_box(c);
  EXPECT_EQ(b.min, (Point3{2, 3, 4}));
  EXPECT_EQ(b.max, (Point3{2, 3, 4}));
  EXPECT_EQ(b.diagonal(), 0.0);
}

TEST(BoundingBox, MatchesExhaustiveExtrema) {
  const PointCloud c = testing_oracles::random_cloud(1000, 11);
  Point3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const Point3& p : c.points) {
    for (std::size_t d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  EXPECT_DOUBLE_EQ(bounding_box(c).diagonal(), norm(hi - lo));
}

TEST(BoundingBox, EmptyCloudIsDataError) { EXPECT_THROW((void)bounding_box(PointCloud{}), DataError); }

TEST(SpatialIndex, EmptyCloudIsDataError) { EXPECT_THROW(SpatialIndex{PointCloud{}}, DataError); }

TEST(SpatialIndex, TinyInstance) {
  PointCloud c;
  c.points = {{0, 0, 0}, {1, 0, 0}, {0, 3, 0}};
  const SpatialIndex idx(c);
  const Point3 q{0.9, 0.1, 0};
  EXPECT_EQ(idx.knn(q, 1), testing_oracles::brute_knn(c.points, q, 1));
}

TEST(SpatialIndex, KnnMatchesBruteForce) {
  const PointCloud c = testing_oracles::random_cloud(500, 3);
  const SpatialIndex idx(c);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  for (int q = 0; q < 50; ++q) {
    const Point3 p{u(rng), u(rng), u(rng)};
    EXPECT_EQ(idx.knn(p, 16), testing_oracles::brute_knn(c.points, p, 16));
  }
}

TEST(SpatialIndex, KnnAllKWithTiesOnGrid) {
  // A lattice produces many equal distances; the lower index must win.
  PointCloud c;
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      for (int z = 0; z < 3; ++z) c.points.push_back({double(x), double(y), double(z)});
  const SpatialIndex idx(c);
  for (std::size_t q = 0; q < c.size(); q += 7) {
    for (std::size_t k = 1; k < c.size(); ++k) {
      ASSERT_EQ(idx.knn(c[q], k), testing_oracles::brute_knn(c.points, c[q], k)) << "q=" << q << " k=" << k;
    }
  }
}

TEST(SpatialIndex, RadiusZeroReturnsCoincidentPoints) {
  PointCloud c;
  c.points = {{1, 1, 1}, {0, 0, 0}, {1, 1, 1}, {1, 1, 1.5}};
  const SpatialIndex idx(c);
  const auto r = idx.radius_search({1, 1, 1}, 0.0);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].index, 0u);
  EXPECT_EQ(r[1].index, 2u);
}

TEST(SpatialIndex, RadiusSearchMatchesScan) {
  const PointCloud c = testing_oracles::random_cloud(800, 8);
  const SpatialIndex idx(c);
  for (std::size_t q = 0; q < c.size(); q += 37) {
    const auto got = idx.radius_search(c[q], 0.13);
    std::vector<Neighbor> want;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double d = squared_distance(c[q], c[i]);
      if (d <= 0.13 * 0.13) want.push_back({static_cast<std::uint32_t>(i), d});
    }
    std::sort(want.begin(), want.end());
    EXPECT_EQ(got, want);
  }
}

TEST(Patch, SinglePointPadsWithCenter) {
  PointCloud c;
  c.points.push_back({5, 5, 5});
  const Patch p = extract_patch(c, 0, 1.0, 4, 0);
  ASSERT_EQ(p.size(), 4u);
  for (const Point3& q : p.points) EXPECT_EQ(q, (Point3{0, 0, 0}));
}

TEST(Patch, NeighborAtRadiusNormalizesToUnit) {
  PointCloud c;
  c.points = {{0, 0, 0}, {0.25, 0, 0}};
  const Patch p = extract_patch(c, 0, 0.25, 2, 0);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.points[0], (Point3{0, 0, 0}));
  EXPECT_EQ(p.points[1], (Point3{1, 0, 0}));
}

TEST(Patch, MembersLieInBallAndDenormalize) {
  const PointCloud c = testing_oracles::random_cloud(1000, 21);
  const double r = PatchOptions::radius_for(c);
  for (std::size_t center : {0u, 17u, 400u, 999u}) {
    const Patch p = extract_patch(c, center, r, 500, 3);
    ASSERT_EQ(p.size(), 500u);
    EXPECT_EQ(p.points[0], (Point3{0, 0, 0}));
    std::size_t in_ball = 0;
    for (std::size_t i = 0; i < c.size(); ++i) in_ball += squared_distance(c[i], c[center]) <= r * r;
    std::vector<std::size_t> used;
    for (std::size_t j = 1; j < std::min<std::size_t>(in_ball, 500); ++j) {
      const Point3 w = p.denormalize(p.points[j]);
      // exhaustive scan: w must be (to rounding) a cloud point within the ball
      std::size_t best = 0;
      for (std::size_t i = 1; i < c.size(); ++i)
        if (squared_distance(c[i], w) < squared_distance(c[best], w)) best = i;
      EXPECT_LE(norm(c[best] - w), 1e-12 * std::max(1.0, norm(c[best])));
      EXPECT_LE(squared_distance(c[best], c[center]), r * r * (1 + 1e-12));
      EXPECT_NE(best, center);
      used.push_back(best);
    }
    std::sort(used.begin(), used.end());
    EXPECT_EQ(std::adjacent_find(used.begin(), used.end()), used.end()) << "sampled with replacement";
  }
}

TEST(Patch, PaddingWhenBallIsSmall) {
  const PointCloud c = testing_oracles::random_cloud(200, 2);
  const Patch p = extract_patch(c, 5, 0.05, 64, 0);
  std::size_t in_ball = 0;
  for (std::size_t i = 0; i < c.size(); ++i) in_ball += squared_distance(c[i], c[5]) <= 0.05 * 0.05;
  ASSERT_LT(in_ball, 64u);
  for (std::size_t j = in_ball; j < 64; ++j) EXPECT_EQ(p.points[j], (Point3{0, 0, 0}));
}

TEST(Patch, UnitBallInvariantAndDeterminism) {
  const PointCloud c = testing_oracles::random_cloud(600, 9);
  const PatchExtractor ex(c, PatchOptions{0.2, 32, 16});
  for (std::size_t i = 0; i < c.size(); i += 13) {
    const Patch a = ex.extract(i, 77);
    const Patch b = ex.extract(i, 77);
    EXPECT_EQ(a.points, b.points);
    for (const Point3& q : a.points) EXPECT_LE(norm(q), 1.0 + 1e-12);
  }
}

TEST(Patch, SparseFallbackUsesNearestPoints) {
  PointCloud c = testing_oracles::random_cloud(300, 4);
  c.points.push_back({10, 10, 10});  // isolated
  const std::size_t iso = c.size() - 1;
  const PatchExtractor ex(c, PatchOptions{0.1, 40, 16});
  const Patch p = ex.extract(iso, 0);
  const auto want = testing_oracles::brute_knn(c.points, c[iso], 17);
  ASSERT_EQ(want[0].index, iso);
  EXPECT_NEAR(p.scale, std::sqrt(want.back().squared_distance), 1e-12);
  std::size_t real = 0;
  for (std::size_t j = 1; j < p.size(); ++j) real += !(p.points[j] == Point3{0, 0, 0});
  EXPECT_EQ(real, 16u);
}

TEST(Patch, CenterOutOfRangeThrows) {
  const PointCloud c = testing_oracles::random_cloud(10, 1);
  EXPECT_THROW((void)extract_patch(c, 10, 0.1, 4, 0), InvalidArgument);
}

}  // namespace
}  // namespace pcclean
