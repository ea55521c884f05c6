// Copyright 2026 The wod Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wod/scoring.hpp"

namespace wod {
namespace {

// Explicit 3x3 inverse via the adjugate, independent of any factorization.
Eigen::Matrix3d adjugate_inverse(const Eigen::Matrix3d& a) {
  Eigen::Matrix3d c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (i + 1) % 3, r1 = (i + 2) % 3, c0 = (j + 1) % 3, c1 = (j + 2) % 3;
      c(i, j) = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
    }
  const double det = a(0, 0) * c(0, 0) + a(0, 1) * c(0, 1) + a(0, 2) * c(0, 2);
  return c.transpose() / det;
}

Eigen::MatrixXd random_spd(Eigen::Index d, Rng& rng) {
  const Eigen::MatrixXd a = testing::random_matrix(static_cast<std::size_t>(d), static_cast<std::size_t>(d), rng);
  return a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
}

ClusterModel single_cluster(const Eigen::RowVectorXd& center, const Eigen::MatrixXd& cov) {
  ClusterModel m;
  m.k = 1;
  m.centers = center;
  m.covariances = {cov};
  m.cluster_mass = {1.0};
  return m;
}

TEST(Mahalanobis, IdentityEqualsEuclidean) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + trial % 6;
    const auto p = testing::random_matrix(2, static_cast<std::size_t>(d), rng, 3.0);
    const double m = mahalanobis_distance(p.row(0), p.row(1), Eigen::MatrixXd::Identity(d, d));
    EXPECT_NEAR(m, (p.row(0) - p.row(1)).norm(), 1e-9);
  }
}

TEST(Mahalanobis, MatchesExplicitInverse) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Matrix3d cov = random_spd(3, rng);
    const auto p = testing::random_matrix(2, 3, rng, 2.0);
    const Eigen::Vector3d diff = (p.row(0) - p.row(1)).transpose();
    const double expected = std::sqrt(diff.dot(adjugate_inverse(cov) * diff));
    EXPECT_NEAR(mahalanobis_distance(p.row(0), p.row(1), Eigen::MatrixXd(cov)), expected, 1e-9 * std::max(1.0, expected));
  }
}

TEST(Mahalanobis, DiagonalExample) {
  Eigen::MatrixXd cov(2, 2);
  cov << 4, 0, 0, 1;
  Eigen::RowVector2d x(2, 1), c(0, 0);
  EXPECT_NEAR(mahalanobis_distance(x, c, cov), std::sqrt(2.0), 1e-12);
}

TEST(Mahalanobis, AffineInvariance) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index d = 2 + trial % 3;
    const auto ud = static_cast<std::size_t>(d);
    const Eigen::MatrixXd cov = random_spd(d, rng);
    Eigen::MatrixXd a = testing::random_matrix(ud, ud, rng) + 2.0 * Eigen::MatrixXd::Identity(d, d);
    const Eigen::VectorXd b = testing::random_matrix(ud, 1, rng);
    const auto p = testing::random_matrix(2, ud, rng);
    const Eigen::VectorXd x = p.row(0).transpose(), c = p.row(1).transpose();
    const double before = mahalanobis_distance(x.transpose(), c.transpose(), cov);
    const Eigen::VectorXd ax = a * x + b, ac = a * c + b;
    const Eigen::MatrixXd acov = a * cov * a.transpose();
    const double after = mahalanobis_distance(ax.transpose(), ac.transpose(), acov);
    EXPECT_NEAR(after, before, 1e-6 * std::max(1.0, before));
  }
}

TEST(Mahalanobis, RejectsSingular) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_THROW(CovarianceFactor{cov}, NumericError);
}

TEST(Mahalanobis, DimensionMismatch) {
  const CovarianceFactor f(Eigen::MatrixXd::Identity(2, 2));
  EXPECT_THROW(f.distance(Eigen::RowVector3d(1, 2, 3), Eigen::RowVector3d(0, 0, 0)), DataError);
}

TEST(Score, DividesDistanceByWeight) {
  Eigen::MatrixXd x(2, 2);
  x << 3, 4, 3, 4;
  const auto m = single_cluster(Eigen::RowVector2d(0, 0), Eigen::MatrixXd::Identity(2, 2));
  const auto s = score(x, Weights{{1.0, 0.5}}, m);
  EXPECT_DOUBLE_EQ(s[0], 5.0);
  EXPECT_DOUBLE_EQ(s[1], 10.0);
}

TEST(Score, NonNegativeFiniteAndDecreasingInWeight) {
  Rng rng(4);
  const auto x = testing::blobs(100, 2, 2, rng);
  ClusterConfig cfg;
  const auto model = weighted_kmeans(x, uniform_weights(100), cfg);
  const auto w = testing::random_weights(100, rng);
  const auto s = score(x, w, model);
  Weights heavier = w;
  for (auto& v : heavier.values) v *= 2.0;
  const auto s2 = score(x, heavier, model);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_TRUE(std::isfinite(s[i]));
    EXPECT_GE(s[i], 0.0);
    EXPECT_LE(s2[i], s[i]);
  }
}

TEST(Score, UsesNearestCenter) {
  ClusterModel m;
  m.k = 2;
  m.centers.resize(2, 1);
  m.centers << 0, 10;
  m.covariances = {Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1)};
  Eigen::MatrixXd x(2, 1);
  x << 1, 8;
  const auto s = score(x, uniform_weights(2), m);
  EXPECT_DOUBLE_EQ(s[0], 1.0);
  EXPECT_DOUBLE_EQ(s[1], 2.0);
}

TEST(Score, DimensionMismatch) {
  const auto m = single_cluster(Eigen::RowVector2d(0, 0), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_THROW(score(Eigen::MatrixXd::Zero(3, 3), uniform_weights(3), m), DataError);
}

TEST(Density, OneDimensionalExample) {
  Eigen::MatrixXd x(4, 1);
  x << 0, 0.1, 0.2, 5;
  const auto counts = neighbor_counts(x, 0.15);
  EXPECT_EQ(counts, (std::vector<std::size_t>{1, 2, 1, 0}));
  EXPECT_EQ(density_flags(x, 0.15, 1), (std::vector<bool>{false, false, false, true}));
  EXPECT_EQ(density_flags(x, 0.15, 2), (std::vector<bool>{true, false, true, true}));
}

TEST(Density, BoundaryIsInclusive) {
  Eigen::MatrixXd x(2, 1);
  x << 0, 0.5;
  EXPECT_EQ(neighbor_counts(x, 0.5), (std::vector<std::size_t>{1, 1}));
}

TEST(Density, MatchesBruteForce) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 20 + uniform_index(rng, 200);
    const auto x = testing::random_matrix(n, 2, rng);
    const double eps = 0.1 + uniform01(rng);
    const std::size_t min_pts = 1 + uniform_index(rng, 8);
    const auto flags = density_flags(x, eps, min_pts);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && (x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm() <= eps) ++c;
      EXPECT_EQ(flags[i], c < min_pts);
    }
  }
}

TEST(Density, ScoresFollowCounts) {
  const auto s = density_scores({0, 1, 3});
  EXPECT_DOUBLE_EQ(s[0], 1.0);
  EXPECT_DOUBLE_EQ(s[1], 0.5);
  EXPECT_DOUBLE_EQ(s[2], 0.25);
}

TEST(Density, RejectsBadEps) { EXPECT_THROW(neighbor_counts(Eigen::MatrixXd::Zero(2, 1), 0.0), ConfigError); }

// Brute-force variance over ordered-pair-free enumeration for a tiny input.
TEST(Abod, MatchesDirectVariance) {
  Rng rng(6);
  const auto x = testing::random_matrix(7, 2, rng);
  const auto raw = abod_raw(x);
  for (Eigen::Index i = 0; i < 7; ++i) {
    std::vector<double> v;
    for (Eigen::Index j = 0; j < 7; ++j)
      for (Eigen::Index l = j + 1; l < 7; ++l) {
        if (j == i || l == i) continue;
        const Eigen::RowVectorXd a = x.row(j) - x.row(i), b = x.row(l) - x.row(i);
        v.push_back(a.dot(b) / (a.squaredNorm() * b.squaredNorm()));
      }
    double mean = 0.0;
    for (double e : v) mean += e;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double e : v) var += (e - mean) * (e - mean);
    var /= static_cast<double>(v.size());
    EXPECT_NEAR(raw[static_cast<std::size_t>(i)], var, 1e-12 * std::max(1.0, var));
  }
}

TEST(Abod, EndpointsOfALineScoreHighest) {
  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 2, 3, 4;
  const auto s = abod_score(x);
  EXPECT_GT(s[0], s[2]);
  EXPECT_GT(s[4], s[2]);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_GE(s[i], 0.0);
}

TEST(Abod, IsolatedPointScoresHighest) {
  Rng rng(7);
  Eigen::MatrixXd x = testing::random_matrix(40, 2, rng);
  x.row(39) << 20, 20;
  const auto s = abod_score(x);
  for (std::size_t i = 0; i + 1 < 40; ++i) EXPECT_GT(s[39], s[i]);
}

TEST(Abod, NeedsThreeRows) { EXPECT_THROW(abod_raw(Eigen::MatrixXd::Zero(2, 2)), DataError); }

}  // namespace
}  // namespace wod
