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

// Labeled synthetic benchmark: two unit-covariance Gaussian clusters centred
// at (0, 0) and (6, 6) plus outliers drawn uniformly from [-10, 16]^2. Rows
// are shuffled; the whole file is a function of the seed.

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "wod/data.hpp"
#include "wod/random.hpp"

namespace wod {

struct SynthSpec {
  std::uint64_t seed = 7;
  std::size_t inliers = 950;
  std::size_t outliers = 50;
};

inline Dataset make_synth(const SynthSpec& spec) {
  const std::size_t n = spec.inliers + spec.outliers;
  if (n == 0) throw ConfigError("synth needs at least one row");
  Rng rng(spec.seed);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
  std::vector<bool> y(n, false);
  const std::size_t first_cluster = (spec.inliers + 1) / 2;
  for (std::size_t i = 0; i < spec.inliers; ++i) {
    const double c = i < first_cluster ? 0.0 : 6.0;
    x(static_cast<Eigen::Index>(i), 0) = c + standard_normal(rng);
    x(static_cast<Eigen::Index>(i), 1) = c + standard_normal(rng);
  }
  for (std::size_t i = spec.inliers; i < n; ++i) {
    x(static_cast<Eigen::Index>(i), 0) = -10.0 + 26.0 * uniform01(rng);
    x(static_cast<Eigen::Index>(i), 1) = -10.0 + 26.0 * uniform01(rng);
    y[i] = true;
  }
  const auto order = permutation(n, rng);

  Dataset d;
  d.feature_names = {"x0", "x1"};
  d.label_name = "label";
  d.features.resize(static_cast<Eigen::Index>(n), 2);
  d.labels.emplace();
  for (std::size_t r = 0; r < n; ++r) {
    d.features.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(order[r]));
    d.labels->push_back(y[order[r]]);
    d.row_ids.push_back(std::to_string(r));
  }
  return d;
}

}  // namespace wod
