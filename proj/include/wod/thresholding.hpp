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

// Turning scores into outlier flags. All policies flag strictly above the
// threshold; a score equal to the threshold is an inlier.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wod/error.hpp"
#include "wod/format.hpp"
#include "wod/scoring.hpp"

namespace wod {

struct DetectionResult {
  ScoreVector scores;
  std::optional<double> threshold;  // empty when flags come from density counting
  std::vector<bool> flags;
  std::string policy;        // fixed | quantile | chisq | density
  double policy_parameter = 0.0;  // t, q, alpha or min_pts
  std::string score_method;

  std::size_t flag_count() const { return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true)); }
};

inline std::vector<bool> apply_threshold(const ScoreVector& s, double t) {
  std::vector<bool> flags(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) flags[i] = s.values[i] > t;
  return flags;
}

inline DetectionResult fixed_threshold(const ScoreVector& s, double t) {
  if (!std::isfinite(t)) throw ConfigError("threshold.value must be finite");
  return DetectionResult{s, t, apply_threshold(s, t), "fixed", t, {}};
}

/// Nearest-rank quantile: the ceil(q*n)-th smallest score.
inline double nearest_rank(const ScoreVector& s, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("threshold.q must lie in (0, 1)");
  if (s.size() == 0) throw DataError("quantile of an empty score vector");
  const auto n = static_cast<double>(s.size());
  // The small slack stops q*n = 95.00000000000001 from rounding up a rank.
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, s.size());
  std::vector<double> sorted = s.values;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

inline DetectionResult quantile_threshold(const ScoreVector& s, double q) {
  const double t = nearest_rank(s, q);
  return DetectionResult{s, t, apply_threshold(s, t), "quantile", q, {}};
}

// ---------------------------------------------------------------------------
// Chi-square calibration
// ---------------------------------------------------------------------------

/// Regularized lower incomplete gamma function P(a, x), by series expansion
/// below x = a + 1 and by Lentz's continued fraction for Q = 1 - P above.
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw NumericError("incomplete gamma: shape must be > 0");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  constexpr double eps = 1e-16;
  constexpr int max_iter = 10000;
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < max_iter; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    return std::min(1.0, sum * std::exp(log_prefactor));
  }
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return std::max(0.0, 1.0 - std::exp(log_prefactor) * h);
}

inline double chisq_cdf(double x, double dof) { return regularized_gamma_p(0.5 * dof, 0.5 * x); }

/// Inverse chi-square CDF by bracketing and bisection on chisq_cdf.
inline double chisq_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("chi-square quantile probability must lie in (0, 1)");
  if (!(dof > 0.0)) throw ConfigError("chi-square degrees of freedom must be > 0");
  double lo = 0.0;
  double hi = std::max(1.0, dof);
  while (chisq_cdf(hi, dof) < p) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericError("chi-square quantile: bracket diverged");
  }
  for (int i = 0; i < 400 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chisq_cdf(mid, dof) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Distance threshold sqrt(Q_chi2_d(1 - alpha)) for unweighted Mahalanobis
/// scores in d dimensions.
inline double chisq_threshold_value(double alpha, std::size_t dims) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("threshold.alpha must lie in (0, 1)");
  if (dims < 1) throw ConfigError("chi-square threshold needs dims >= 1");
  return std::sqrt(chisq_quantile(1.0 - alpha, static_cast<double>(dims)));
}

inline DetectionResult chisq_threshold(const ScoreVector& s, double alpha, std::size_t dims) {
  const double t = chisq_threshold_value(alpha, dims);
  return DetectionResult{s, t, apply_threshold(s, t), "chisq", alpha, {}};
}

/// Density flags pass through unchanged; there is no score threshold.
inline DetectionResult density_result(const ScoreVector& s, std::vector<bool> flags, std::size_t min_pts) {
  if (flags.size() != s.size()) throw DataError("density flags do not match the score vector");
  return DetectionResult{s, std::nullopt, std::move(flags), "density", static_cast<double>(min_pts), "density"};
}

}  // namespace wod
