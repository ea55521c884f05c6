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

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "wod/error.hpp"
#include "wod/scoring.hpp"

namespace wod {

/// Confusion counts with outlier as the positive class. Zero denominators give
/// rates of 0. detection_rate is recall under another name.
struct Metrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double detection_rate = 0.0;
  std::optional<double> auc;

  std::size_t total() const { return tp + fp + fn + tn; }
};

inline Metrics confusion(const std::vector<bool>& flags, const std::vector<bool>& labels) {
  if (flags.size() != labels.size()) {
    throw DataError("confusion: " + std::to_string(flags.size()) + " flags vs " + std::to_string(labels.size()) +
                    " labels");
  }
  Metrics m;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i] && labels[i]) ++m.tp;
    else if (flags[i]) ++m.fp;
    else if (labels[i]) ++m.fn;
    else ++m.tn;
  }
  auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.accuracy = ratio(m.tp + m.tn, m.total());
  m.detection_rate = m.recall;
  return m;
}

/// ROC AUC by the Mann-Whitney rank statistic with midranks for ties:
/// (R_pos - P(P+1)/2) / (P N).
inline double roc_auc(const ScoreVector& scores, const std::vector<bool>& labels) {
  const std::size_t n = scores.size();
  if (labels.size() != n) throw DataError("roc_auc: score and label counts differ");
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw DataError("roc_auc needs both outlier and inlier labels");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ranks are half-integers at most, so doubling keeps the sum exact.
  double twice_rank_sum = 0.0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    const double twice_midrank = static_cast<double>(start + 1 + end);  // 2 * mean of ranks start+1..end
    for (std::size_t r = start; r < end; ++r) {
      if (labels[order[r]]) twice_rank_sum += twice_midrank;
    }
    start = end;
  }
  const double p = static_cast<double>(pos);
  const double u2 = twice_rank_sum - p * (p + 1.0);
  return u2 / (2.0 * p * static_cast<double>(neg));
}

/// Confusion metrics plus AUC when both classes are present.
inline Metrics evaluate(const ScoreVector& scores, const std::vector<bool>& flags, const std::vector<bool>& labels) {
  Metrics m = confusion(flags, labels);
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (pos > 0 && pos < labels.size()) m.auc = roc_auc(scores, labels);
  return m;
}

}  // namespace wod
