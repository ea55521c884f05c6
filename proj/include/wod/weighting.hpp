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

// Per-instance importance weights.
//
// Convention: a high weight marks frequent (normal) behaviour and a low weight
// marks rare behaviour. Every scheme returns weights rescaled to mean 1, so the
// uniform scheme is exactly 1 everywhere and the weighted formulas downstream
// reduce to their unweighted forms.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wod/data.hpp"
#include "wod/distance.hpp"
#include "wod/error.hpp"

namespace wod {

struct Weights {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// One bin index per feature.
using PatternKey = std::vector<std::size_t>;

/// Rescales to mean 1: w_i * n / sum(w).
inline Weights normalize_weights(Weights w) {
  if (w.values.empty()) throw DataError("cannot normalize an empty weight vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = w.values[i];
    if (!std::isfinite(v) || v <= 0.0) {
      throw DataError("weight " + std::to_string(i) + " is not a positive finite number");
    }
    sum += v;
  }
  const double scale = static_cast<double>(w.size()) / sum;
  for (auto& v : w.values) v *= scale;
  return w;
}

inline Weights uniform_weights(std::size_t n) {
  if (n == 0) throw DataError("uniform_weights needs n >= 1");
  return Weights{std::vector<double>(n, 1.0)};
}

// ---------------------------------------------------------------------------
// Pattern frequency
// ---------------------------------------------------------------------------

/// Per-feature [lo, hi] range the equal-width bins are laid over. Fitted on
/// training data and reused unchanged for later batches.
struct BinRanges {
  std::vector<double> lo;
  std::vector<double> hi;
};

inline BinRanges fit_bin_ranges(const Eigen::MatrixXd& x) {
  BinRanges r;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    r.lo.push_back(x.col(j).minCoeff());
    r.hi.push_back(x.col(j).maxCoeff());
  }
  return r;
}

/// Equal-width bin of `v` over [lo, hi]. The maximum lands in the top bin,
/// values outside the range clamp to the end bins and a constant feature
/// (hi <= lo) uses bin 0.
inline std::size_t bin_index(double v, double lo, double hi, std::size_t bins) {
  if (!(hi > lo)) return 0;
  const double pos = std::floor((v - lo) / (hi - lo) * static_cast<double>(bins));
  if (pos <= 0.0) return 0;
  if (pos >= static_cast<double>(bins - 1)) return bins - 1;
  return static_cast<std::size_t>(pos);
}

inline std::vector<PatternKey> pattern_keys(const Eigen::MatrixXd& x, std::size_t bins, const BinRanges& ranges) {
  if (bins < 2) throw ConfigError("weighting.bins must be >= 2");
  if (ranges.lo.size() != static_cast<std::size_t>(x.cols())) throw DataError("bin ranges have wrong dimension");
  std::vector<PatternKey> keys(static_cast<std::size_t>(x.rows()), PatternKey(static_cast<std::size_t>(x.cols())));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const auto jj = static_cast<std::size_t>(j);
      keys[static_cast<std::size_t>(i)][jj] = bin_index(x(i, j), ranges.lo[jj], ranges.hi[jj], bins);
    }
  }
  return keys;
}

/// count(pattern of row i) / n, before mean-1 scaling.
inline Weights raw_pattern_frequency_weights(const Eigen::MatrixXd& x, std::size_t bins, const BinRanges& ranges) {
  if (x.rows() == 0) throw DataError("pattern weighting needs at least one row");
  const auto keys = pattern_keys(x, bins, ranges);
  std::map<PatternKey, std::size_t> counts;
  for (const auto& k : keys) ++counts[k];
  Weights w;
  w.values.reserve(keys.size());
  const auto n = static_cast<double>(keys.size());
  for (const auto& k : keys) w.values.push_back(static_cast<double>(counts[k]) / n);
  return w;
}

inline Weights pattern_frequency_weights(const Eigen::MatrixXd& x, std::size_t bins, const BinRanges& ranges) {
  return normalize_weights(raw_pattern_frequency_weights(x, bins, ranges));
}

/// Bins laid over the data's own per-feature range.
inline Weights pattern_frequency_weights(const Dataset& d, std::size_t bins) {
  return pattern_frequency_weights(d.features, bins, fit_bin_ranges(d.features));
}

// ---------------------------------------------------------------------------
// kNN distance
// ---------------------------------------------------------------------------

/// 1 / (1 + mean distance to the k nearest other rows), before scaling.
/// Neighbours are ranked by (distance, row index) and their distances summed
/// in that order, so the result is fully deterministic.
inline Weights raw_knn_distance_weights(const Eigen::MatrixXd& x, std::size_t k) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (k < 1 || k + 1 > n) {
    throw DataError("weighting.k = " + std::to_string(k) + " must lie in [1, n-1] with n = " + std::to_string(n));
  }
  Weights w;
  w.values.resize(n);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dij = euclidean(x.row(static_cast<Eigen::Index>(i)), x.row(static_cast<Eigen::Index>(j)));
      dist.emplace_back(dij, j);
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k));
    double sum = 0.0;
    for (std::size_t r = 0; r < k; ++r) sum += dist[r].first;
    w.values[i] = 1.0 / (1.0 + sum / static_cast<double>(k));
  }
  return w;
}

inline Weights knn_distance_weights(const Eigen::MatrixXd& x, std::size_t k) {
  return normalize_weights(raw_knn_distance_weights(x, k));
}

inline Weights knn_distance_weights(const Dataset& d, std::size_t k) { return knn_distance_weights(d.features, k); }

}  // namespace wod
