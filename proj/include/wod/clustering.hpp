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

// Weighted k-means with weight-biased k-means++ seeding and per-cluster
// covariance tracking.
//
// Weights enter the seeding probabilities and the centroid/covariance updates.
// Assignment is by distance alone: Euclidean by default, or per-cluster
// Mahalanobis distance under the covariance from the previous iteration.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wod/data.hpp"
#include "wod/distance.hpp"
#include "wod/error.hpp"
#include "wod/mahalanobis.hpp"
#include "wod/random.hpp"
#include "wod/weighting.hpp"

namespace wod {

enum class Metric { euclidean, mahalanobis };

struct ClusterConfig {
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  double tol = 1e-6;    // max center shift that counts as converged
  double ridge = 1e-6;  // added to every covariance diagonal
  Metric metric = Metric::euclidean;

  void validate() const {
    if (k < 1) throw ConfigError("cluster.k must be >= 1");
    if (max_iters < 1) throw ConfigError("cluster.max_iters must be >= 1");
    if (!(tol > 0.0) || !std::isfinite(tol)) throw ConfigError("cluster.tol must be > 0");
    if (!(ridge > 0.0) || !std::isfinite(ridge)) throw ConfigError("cluster.ridge must be > 0");
  }
};

struct ClusterModel {
  std::size_t k = 0;
  Eigen::MatrixXd centers;                   // k x d
  std::vector<Eigen::MatrixXd> covariances;  // k matrices, d x d, ridge included
  std::vector<std::size_t> assignments;      // one per training row
  std::vector<double> cluster_mass;          // sum of member weights
  std::size_t iterations = 0;
  bool converged = false;
  Metric metric = Metric::euclidean;

  std::size_t dims() const { return static_cast<std::size_t>(centers.cols()); }

  std::vector<CovarianceFactor> factors() const {
    std::vector<CovarianceFactor> out;
    out.reserve(covariances.size());
    for (const auto& c : covariances) out.emplace_back(c);
    return out;
  }
};

/// Snapshot handed to an observer after each assign/update round.
struct IterationTrace {
  std::size_t iteration;  // 1-based
  const std::vector<std::size_t>& assignments;
  const Eigen::MatrixXd& centers;  // after the update step
  double objective;                // weighted objective at the updated centers
};

using IterationObserver = std::function<void(const IterationTrace&)>;

namespace detail {

/// Index drawn with probability proportional to mass[i]; -1 if the mass is zero.
inline std::ptrdiff_t sample_proportional(const std::vector<double>& mass, Rng& rng) {
  double total = 0.0;
  for (double m : mass) total += m;
  if (!(total > 0.0)) return -1;
  const double target = uniform01(rng) * total;
  double cum = 0.0;
  std::ptrdiff_t last_positive = -1;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0.0) continue;
    cum += mass[i];
    last_positive = static_cast<std::ptrdiff_t>(i);
    if (cum > target) return last_positive;
  }
  return last_positive;  // rounding left target just above the final sum
}

inline void check_inputs(const Eigen::MatrixXd& x, const Weights& w) {
  if (x.rows() == 0 || x.cols() == 0) throw DataError("clustering needs a non-empty data matrix");
  if (w.size() != static_cast<std::size_t>(x.rows())) {
    throw DataError("weight count " + std::to_string(w.size()) + " does not match row count " + std::to_string(x.rows()));
  }
  if (!x.allFinite()) throw DataError("clustering input contains non-finite values");
}

}  // namespace detail

/// k-means++ seeding: the first center is drawn with probability proportional
/// to w_i, each later one proportional to w_i * D(x_i)^2 where D is the
/// distance to the nearest center chosen so far.
inline Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& x, const Weights& w, std::size_t k, std::uint64_t seed) {
  detail::check_inputs(x, w);
  if (k < 1) throw ConfigError("cluster.k must be >= 1");
  const std::size_t distinct = distinct_rows(x);
  if (k > distinct) {
    throw DataError("cluster.k = " + std::to_string(k) + " exceeds the number of distinct rows (" +
                    std::to_string(distinct) + ")");
  }
  const auto n = static_cast<std::size_t>(x.rows());
  Rng rng(seed);
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(k), x.cols());

  const auto first = detail::sample_proportional(w.values, rng);
  if (first < 0) throw DataError("kmeans++: weights carry no mass");
  centers.row(0) = x.row(first);

  std::vector<double> nearest_sq(n, std::numeric_limits<double>::infinity());
  std::vector<double> mass(n);
  for (std::size_t c = 1; c < k; ++c) {
    const auto prev = centers.row(static_cast<Eigen::Index>(c - 1));
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = squared_euclidean(x.row(static_cast<Eigen::Index>(i)), prev);
      if (d2 < nearest_sq[i]) nearest_sq[i] = d2;
      mass[i] = w.values[i] * nearest_sq[i];
    }
    const auto next = detail::sample_proportional(mass, rng);
    if (next < 0) throw DataError("kmeans++: no remaining point is distinct from the chosen centers");
    centers.row(static_cast<Eigen::Index>(c)) = x.row(next);
  }
  return centers;
}

/// Sum over rows of w_i * ||x_i - c_{a(i)}||^2.
inline double weighted_objective(const Eigen::MatrixXd& x, const Weights& w, const Eigen::MatrixXd& centers,
                                 const std::vector<std::size_t>& assignments) {
  if (x.cols() != centers.cols()) throw DataError("objective: data and centers differ in dimension");
  if (assignments.size() != static_cast<std::size_t>(x.rows()) || w.size() != assignments.size()) {
    throw DataError("objective: assignments or weights do not match the data");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] >= static_cast<std::size_t>(centers.rows())) throw DataError("objective: assignment out of range");
    total += w.values[i] * squared_euclidean(x.row(static_cast<Eigen::Index>(i)),
                                             centers.row(static_cast<Eigen::Index>(assignments[i])));
  }
  return total;
}

inline double weighted_objective(const Eigen::MatrixXd& x, const Weights& w, const ClusterModel& model) {
  return weighted_objective(x, w, model.centers, model.assignments);
}

namespace detail {

/// Squared distance from row `i` to center `j` under the active metric.
struct MetricView {
  const Eigen::MatrixXd& x;
  const Eigen::MatrixXd& centers;
  const std::vector<CovarianceFactor>* factors;  // null in euclidean mode

  double operator()(std::size_t i, std::size_t j) const {
    const auto xi = x.row(static_cast<Eigen::Index>(i));
    const auto cj = centers.row(static_cast<Eigen::Index>(j));
    return factors ? (*factors)[j].squared_distance(xi, cj) : squared_euclidean(xi, cj);
  }
};

}  // namespace detail

/// Runs weighted Lloyd iterations from the given initial centers.
///
/// Each round assigns every row to its nearest center (ties go to the lower
/// index), repairs empty clusters, then recomputes centers as weighted means
/// and covariances as weighted scatter plus ridge * I. Iteration stops when
/// the assignment repeats, when no center moves by tol or more, or after
/// max_iters rounds.
///
/// An empty cluster takes over the row with the largest weighted squared
/// distance to its own center, drawn from clusters that keep at least one
/// other member.
inline ClusterModel weighted_kmeans_from(const Eigen::MatrixXd& x, const Weights& w, const Eigen::MatrixXd& initial,
                                         const ClusterConfig& cfg, const IterationObserver& observer = {}) {
  cfg.validate();
  detail::check_inputs(x, w);
  if (initial.cols() != x.cols()) throw DataError("initial centers have the wrong dimension");
  const auto n = static_cast<std::size_t>(x.rows());
  const auto k = static_cast<std::size_t>(initial.rows());
  if (k == 0 || k > n) throw DataError("cluster count must lie in [1, n]");
  const auto d = x.cols();

  ClusterModel m;
  m.k = k;
  m.metric = cfg.metric;
  m.centers = initial;
  m.covariances.assign(k, Eigen::MatrixXd::Identity(d, d));
  m.assignments.assign(n, 0);
  m.cluster_mass.assign(k, 0.0);

  std::vector<std::size_t> previous;
  std::vector<std::size_t> counts(k);
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    std::optional<std::vector<CovarianceFactor>> factors;
    if (cfg.metric == Metric::mahalanobis) factors = m.factors();
    const detail::MetricView dist{x, m.centers, factors ? &*factors : nullptr};

    // Assignment.
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = dist(i, 0);
      for (std::size_t j = 1; j < k; ++j) {
        const double dj = dist(i, j);
        if (dj < best_d) {
          best_d = dj;
          best = j;
        }
      }
      m.assignments[i] = best;
      ++counts[best];
    }

    // Empty-cluster repair.
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      std::ptrdiff_t pick = -1;
      double pick_cost = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto a = m.assignments[i];
        if (counts[a] < 2) continue;
        const double cost = w.values[i] * dist(i, a);
        if (cost > pick_cost) {
          pick_cost = cost;
          pick = static_cast<std::ptrdiff_t>(i);
        }
      }
      if (pick < 0) throw DataError("cannot repair empty cluster: too few rows");
      --counts[m.assignments[static_cast<std::size_t>(pick)]];
      m.assignments[static_cast<std::size_t>(pick)] = j;
      counts[j] = 1;
    }

    // Weighted centroid update.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), d);
    std::fill(m.cluster_mass.begin(), m.cluster_mass.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = static_cast<Eigen::Index>(m.assignments[i]);
      for (Eigen::Index c = 0; c < d; ++c) sums(a, c) += w.values[i] * x(static_cast<Eigen::Index>(i), c);
      m.cluster_mass[m.assignments[i]] += w.values[i];
    }
    double max_shift = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      Eigen::RowVectorXd updated(d);
      for (Eigen::Index c = 0; c < d; ++c) updated(c) = sums(jj, c) / m.cluster_mass[j];
      max_shift = std::max(max_shift, euclidean(updated, m.centers.row(jj)));
      m.centers.row(jj) = updated;
    }

    // Weighted covariance update.
    for (auto& cov : m.covariances) cov.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = m.assignments[i];
      const Eigen::RowVectorXd diff = x.row(static_cast<Eigen::Index>(i)) - m.centers.row(static_cast<Eigen::Index>(a));
      m.covariances[a].noalias() += w.values[i] * (diff.transpose() * diff);
    }
    for (std::size_t j = 0; j < k; ++j) {
      auto& cov = m.covariances[j];
      cov /= m.cluster_mass[j];
      cov = 0.5 * (cov + cov.transpose()).eval();
      cov.diagonal().array() += cfg.ridge;
    }

    m.iterations = it;
    if (observer) observer(IterationTrace{it, m.assignments, m.centers, weighted_objective(x, w, m)});

    if ((!previous.empty() && previous == m.assignments) || max_shift < cfg.tol) {
      m.converged = true;
      break;
    }
    previous = m.assignments;
  }
  return m;
}

/// k-means++ seeding followed by weighted Lloyd iterations.
inline ClusterModel weighted_kmeans(const Eigen::MatrixXd& x, const Weights& w, const ClusterConfig& cfg,
                                    const IterationObserver& observer = {}) {
  cfg.validate();
  return weighted_kmeans_from(x, w, kmeanspp_init(x, w, cfg.k, cfg.seed), cfg, observer);
}

/// Index of the nearest center under the model's metric.
template <typename Row>
std::size_t nearest_center(const ClusterModel& m, const std::vector<CovarianceFactor>* factors,
                           const Eigen::MatrixBase<Row>& x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m.k; ++j) {
    const auto cj = m.centers.row(static_cast<Eigen::Index>(j));
    const double dj = (m.metric == Metric::mahalanobis && factors) ? (*factors)[j].squared_distance(x, cj)
                                                                    : squared_euclidean(x, cj);
    if (dj < best_d) {
      best_d = dj;
      best = j;
    }
  }
  return best;
}

}  // namespace wod
