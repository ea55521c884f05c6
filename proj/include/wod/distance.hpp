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

#include <cmath>

#include <Eigen/Dense>

namespace wod {

/// Squared Euclidean distance, accumulated left to right over coordinates.
/// A fixed summation order keeps results bitwise reproducible.
template <typename A, typename B>
double squared_euclidean(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double diff = a(j) - b(j);
    s += diff * diff;
  }
  return s;
}

template <typename A, typename B>
double euclidean(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  return std::sqrt(squared_euclidean(a, b));
}

}  // namespace wod
