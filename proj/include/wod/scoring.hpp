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

#pragma once

// Outlier scores. Larger is more anomalous and every score is finite and >= 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wod/clustering.hpp"
#include "wod/distance.hpp"
#include "wod/error.hpp"
#include "wod/mahalanobis.hpp"
#include "wod/weighting.hpp"

namespace wod {

struct ScoreVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Weighted Mahalanobis score s_i = D_M(x_i; c_a, cov_a) / w_i, where a is the
/// cluster nearest to x_i under the model's metric. Rows need not come from
/// the training set.
inline ScoreVector score(const Eigen::MatrixXd& x, const Weights& w, const ClusterModel& model) {
  if (static_cast<std::size_t>(x.cols()) != model.dims()) {
    throw DataError("score: data has " + std::to_string(x.cols()) + " features, model expects " +
                    std::to_string(model.dims()));
  }
  if (w.size() != static_cast<std::size_t>(x.rows())) throw DataError("score: weight count does not match rows");
  const auto factors = model.factors();
  ScoreVector s;
  s.values.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto xi = x.row(i);
    const auto a = nearest_center(model, &factors, xi);
    const double dist = factors[a].distance(xi, model.centers.row(static_cast<Eigen::Index>(a)));
    s.values[static_cast<std::size_t>(i)] = dist / w.values[static_cast<std::size_t>(i)];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Density (eps / minPts)
// ---------------------------------------------------------------------------

/// For each row, how many other rows lie within distance eps (inclusive).
inline std::vector<std::size_t> neighbor_counts(const Eigen::MatrixXd& x, double eps) {
  if (!(eps > 0.0)) throw ConfigError("score.eps must be > 0");
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> counts(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x.row(static_cast<Eigen::Index>(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      if (euclidean(xi, x.row(static_cast<Eigen::Index>(j))) <= eps) {
        ++counts[i];
        ++counts[j];
      }
    }
  }
  return counts;
}

/// Flags rows with fewer than min_pts neighbours within eps.
inline std::vector<bool> density_flags(const Eigen::MatrixXd& x, double eps, std::size_t min_pts) {
  const auto counts = neighbor_counts(x, eps);
  std::vector<bool> flags(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) flags[i] = counts[i] < min_pts;
  return flags;
}

/// Continuous companion to density_flags: 1 / (1 + neighbour count).
inline ScoreVector density_scores(const std::vector<std::size_t>& counts) {
  ScoreVector s;
  s.values.reserve(counts.size());
  for (auto c : counts) s.values.push_back(1.0 / (1.0 + static_cast<double>(c)));
  return s;
}

// ---------------------------------------------------------------------------
// Angle-based
// ---------------------------------------------------------------------------

/// Raw angle-based factor: population variance, over unordered pairs (j, l) of
/// other rows, of <a, b> / (|a|^2 |b|^2) with a = x_j - x_i, b = x_l - x_i.
/// Rows identical to x_i are skipped. Fewer than one valid pair gives 0.
inline std::vector<double> abod_raw(const Eigen::MatrixXd& x) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 3) throw DataError("angle-based scoring needs at least 3 rows");
  std::vector<double> raw(n, 0.0);
  Eigen::MatrixXd diffs(static_cast<Eigen::Index>(n), x.cols());
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Eigen::RowVectorXd diff = x.row(static_cast<Eigen::Index>(j)) - x.row(static_cast<Eigen::Index>(i));
      const double s2 = diff.squaredNorm();
      if (s2 == 0.0) continue;
      diffs.row(static_cast<Eigen::Index>(m)) = diff;
      sq[m] = s2;
      ++m;
    }
    // Welford accumulation over all pairs.
    double mean = 0.0, m2 = 0.0;
    std::size_t count = 0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) {
        const double v = diffs.row(static_cast<Eigen::Index>(a)).dot(diffs.row(static_cast<Eigen::Index>(b))) /
                         (sq[a] * sq[b]);
        ++count;
        const double delta = v - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (v - mean);
      }
    }
    raw[i] = count > 0 ? m2 / static_cast<double>(count) : 0.0;
  }
  return raw;
}

/// Low angle variance marks an outlier, so the score is max(raw) - raw_i.
inline ScoreVector abod_score(const Eigen::MatrixXd& x) {
  const auto raw = abod_raw(x);
  const double top = *std::max_element(raw.begin(), raw.end());
  ScoreVector s;
  s.values.reserve(raw.size());
  for (double r : raw) s.values.push_back(top - r);
  return s;
}

}  // namespace wod
