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

// k-fold cross-validation and grid/random hyperparameter search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wod/config.hpp"
#include "wod/data.hpp"
#include "wod/metrics.hpp"
#include "wod/pipeline.hpp"
#include "wod/random.hpp"

namespace wod {

/// Seeded partition of 0..n-1 into `folds` groups. Fold f takes a contiguous
/// run of a random permutation; the first n % folds folds are one larger.
/// Indices within each fold are sorted.
inline std::vector<std::vector<std::size_t>> fold_partition(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("eval.folds must be >= 2");
  if (folds > n) {
    throw DataError("eval.folds = " + std::to_string(folds) + " exceeds the row count " + std::to_string(n));
  }
  Rng rng(seed);
  const auto perm = permutation(n, rng);
  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = n / folds + (f < n % folds ? 1 : 0);
    out[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(out[f].begin(), out[f].end());
    pos += size;
  }
  return out;
}

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  Metrics metrics;  // auc empty when the test fold holds a single class
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation across folds
  std::size_t count = 0;  // folds contributing
};

struct CvResult {
  std::vector<FoldResult> folds;
  std::map<std::string, MetricSummary> summary;  // keyed by metric name
  std::size_t auc_missing = 0;                   // folds without an AUC
};

/// Value of a named metric, or nullopt when it is undefined for this fold.
inline std::optional<double> metric_value(const Metrics& m, const std::string& name) {
  if (name == "precision") return m.precision;
  if (name == "recall") return m.recall;
  if (name == "f1") return m.f1;
  if (name == "accuracy") return m.accuracy;
  if (name == "detection_rate") return m.detection_rate;
  if (name == "auc") return m.auc;
  throw ConfigError("unknown metric '" + name + "'");
}

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"accuracy", "auc", "detection_rate", "f1", "precision", "recall"};
  return names;
}

inline MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

/// For each fold: fit on the other folds, then score, threshold and evaluate
/// the held-out fold.
inline CvResult cross_validate(const Dataset& d, const PipelineConfig& cfg, std::size_t folds, std::uint64_t seed) {
  if (!d.labels) throw DataError("cross-validation needs labeled data (set data.label_column)");
  d.validate();
  const auto parts = fold_partition(d.rows(), folds, seed);
  CvResult out;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds; ++g) {
      if (g != f) train.insert(train.end(), parts[g].begin(), parts[g].end());
    }
    std::sort(train.begin(), train.end());
    const Dataset train_set = d.select_rows(train);
    const Dataset test_set = d.select_rows(parts[f]);
    const auto model = fit(train_set, cfg);
    const auto batch = apply(model, test_set);
    FoldResult r;
    r.fold = f;
    r.train_rows = train_set.rows();
    r.test_rows = test_set.rows();
    r.metrics = *batch.metrics;
    if (!r.metrics.auc) ++out.auc_missing;
    out.folds.push_back(r);
  }
  for (const auto& name : metric_names()) {
    std::vector<double> values;
    for (const auto& r : out.folds) {
      if (auto v = metric_value(r.metrics, name)) values.push_back(*v);
    }
    out.summary[name] = summarize(values);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hyperparameter search
// ---------------------------------------------------------------------------

struct GridSpec {
  std::vector<std::pair<std::string, std::vector<Json>>> params;
  std::string metric = "f1";
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::optional<std::size_t> random_samples;  // set for random search

  /// Reads tune.* keys from a config. Parameters enumerate in key order.
  static GridSpec from_config(const PipelineConfig& cfg) {
    GridSpec g;
    for (const auto& [key, values] : cfg.tune_grid.items()) {
      g.params.emplace_back(key, std::vector<Json>(values.begin(), values.end()));
    }
    g.metric = cfg.tune_metric;
    g.folds = cfg.folds;
    g.seed = cfg.eval_seed;
    if (cfg.search == SearchMode::random) g.random_samples = cfg.samples;
    return g;
  }

  std::size_t cells() const {
    std::size_t total = 1;
    for (const auto& [key, values] : params) total *= values.size();
    return total;
  }

  void validate() const {
    for (const auto& [key, values] : params) {
      if (values.empty()) throw ConfigError("grid parameter '" + key + "' has no values");
    }
    metric_value(Metrics{}, metric);
  }

  /// Parameter values of cell `index`; the last parameter varies fastest.
  std::vector<std::pair<std::string, Json>> cell(std::size_t index) const {
    std::vector<std::pair<std::string, Json>> out(params.size());
    for (std::size_t p = params.size(); p-- > 0;) {
      const auto& values = params[p].second;
      out[p] = {params[p].first, values[index % values.size()]};
      index /= values.size();
    }
    return out;
  }
};

struct GridRow {
  std::size_t index = 0;  // enumeration index in the full product
  std::vector<std::pair<std::string, Json>> assignment;
  PipelineConfig config;
  CvResult cv;
  std::optional<double> score;  // mean selection metric; empty if undefined
};

struct GridResult {
  std::vector<GridRow> rows;  // in enumeration order
  std::size_t best = 0;       // position in rows

  const GridRow& best_row() const { return rows[best]; }
};

/// Cross-validates every cell (or a seeded random subset of cells) and picks
/// the highest mean selection metric; the earliest cell wins ties.
inline GridResult grid_search(const Dataset& d, const PipelineConfig& base, const GridSpec& grid) {
  grid.validate();
  const std::size_t total = grid.cells();
  std::vector<std::size_t> indices(total);
  for (std::size_t i = 0; i < total; ++i) indices[i] = i;
  if (grid.random_samples && *grid.random_samples < total) {
    Rng rng(grid.seed);
    shuffle(std::span<std::size_t>(indices), rng);
    indices.resize(*grid.random_samples);
    std::sort(indices.begin(), indices.end());
  }

  GridResult out;
  for (const auto index : indices) {
    GridRow row;
    row.index = index;
    row.assignment = grid.cell(index);
    row.config = base;
    for (const auto& [key, v] : row.assignment) row.config.set(key, v);
    row.config.tune_grid = Json::object();
    row.config.validate();
    row.cv = cross_validate(d, row.config, grid.folds, grid.seed);
    const auto& s = row.cv.summary.at(grid.metric);
    if (s.count > 0) row.score = s.mean;
    out.rows.push_back(std::move(row));
  }

  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    if (!out.rows[r].score) continue;
    if (!best || *out.rows[r].score > *out.rows[*best].score) best = r;
  }
  if (!best) throw DataError("selection metric '" + grid.metric + "' is unavailable for every grid cell");
  out.best = *best;
  return out;
}

}  // namespace wod
