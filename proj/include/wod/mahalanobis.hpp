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
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "wod/error.hpp"

namespace wod {

/// Cholesky factor of a covariance matrix, reusable across many distance
/// evaluations. Construction fails with NumericError when the matrix is not
/// positive definite, which signals insufficient ridge regularization.
class CovarianceFactor {
 public:
  explicit CovarianceFactor(const Eigen::MatrixXd& cov) : llt_(cov) {
    if (cov.rows() != cov.cols() || cov.rows() == 0) throw NumericError("covariance matrix must be square and non-empty");
    if (llt_.info() != Eigen::Success || !llt_.matrixL().toDenseMatrix().allFinite()) {
      throw NumericError("covariance matrix is not positive definite (increase cluster.ridge)");
    }
  }

  Eigen::Index dims() const { return llt_.rows(); }

  /// (x - c)^T cov^-1 (x - c) via one triangular solve against L.
  template <typename X, typename C>
  double squared_distance(const Eigen::MatrixBase<X>& x, const Eigen::MatrixBase<C>& center) const {
    if (x.size() != center.size() || x.size() != dims()) throw DataError("mahalanobis: dimension mismatch");
    Eigen::VectorXd diff(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) diff(j) = x.derived()(j) - center.derived()(j);
    llt_.matrixL().solveInPlace(diff);
    return diff.squaredNorm();
  }

  template <typename X, typename C>
  double distance(const Eigen::MatrixBase<X>& x, const Eigen::MatrixBase<C>& center) const {
    return std::sqrt(squared_distance(x, center));
  }

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// sqrt((x - c)^T cov^-1 (x - c)), solved through a Cholesky factorization.
template <typename X, typename C>
double mahalanobis_distance(const Eigen::MatrixBase<X>& x, const Eigen::MatrixBase<C>& center,
                            const Eigen::MatrixXd& cov) {
  return CovarianceFactor(cov).distance(x, center);
}

}  // namespace wod
