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

// End-to-end pipeline: preprocess -> weight -> cluster -> score -> threshold.
//
// fit() learns everything that later batches reuse (imputation fill values,
// normalizer, bin ranges, cluster model, calibrated threshold). apply() runs a
// batch through the fitted state. detect() is fit() followed by apply() on
// the same data.
//
// Batch-level quantities are recomputed on the scored batch: pattern counts
// (over the fitted bin ranges), kNN neighbourhoods and density/angle scores.

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wod/clustering.hpp"
#include "wod/config.hpp"
#include "wod/data.hpp"
#include "wod/error.hpp"
#include "wod/metrics.hpp"
#include "wod/scoring.hpp"
#include "wod/thresholding.hpp"
#include "wod/weighting.hpp"

namespace wod {

/// Wall-clock seconds per stage, in execution order.
using Timings = std::vector<std::pair<std::string, double>>;

struct FittedModel {
  PipelineConfig config;
  std::vector<std::string> feature_names;
  std::vector<double> fill_values;  // per-feature mean of observed training values
  NormalizationParams normalizer;
  BinRanges bin_ranges;  // pattern_frequency only
  ClusterModel cluster;
  std::optional<double> threshold;  // empty for the density method
  std::size_t train_rows = 0;
  double train_objective = 0.0;

  std::size_t dims() const { return feature_names.size(); }
};

struct BatchResult {
  DetectionResult detection;
  Weights weights;
  std::optional<Metrics> metrics;
};

namespace detail {

/// Runs `body`, prefixing any library error with the stage name and recording
/// the elapsed time.
template <typename F>
auto run_stage(const char* name, Timings* timings, F&& body) -> decltype(body()) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    if (timings) {
      timings->emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
  };
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      record();
    } else {
      auto out = body();
      record();
      return out;
    }
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(std::string(name) + ": " + e.what());
  }
}

inline Weights batch_weights(const FittedModel& m, const Dataset& normalized) {
  const auto& cfg = m.config;
  switch (cfg.scheme) {
    case WeightScheme::uniform:
      return uniform_weights(normalized.rows());
    case WeightScheme::pattern_frequency:
      return pattern_frequency_weights(normalized.features, cfg.bins, m.bin_ranges);
    case WeightScheme::knn_distance:
      return knn_distance_weights(normalized.features, cfg.knn_k);
    case WeightScheme::column:
      if (!normalized.row_weights) throw DataError("weight column '" + cfg.weight_column + "' missing from input");
      return normalize_weights(Weights{*normalized.row_weights});
  }
  throw ConfigError("unknown weighting scheme");
}

inline DetectionResult score_and_threshold(const FittedModel& m, const Dataset& normalized, const Weights& w,
                                           Timings* timings) {
  const auto& cfg = m.config;
  if (cfg.method == ScoreMethod::density) {
    return run_stage("score", timings, [&] {
      const auto counts = neighbor_counts(normalized.features, cfg.eps);
      std::vector<bool> flags(counts.size());
      for (std::size_t i = 0; i < counts.size(); ++i) flags[i] = counts[i] < cfg.min_pts;
      return density_result(density_scores(counts), std::move(flags), cfg.min_pts);
    });
  }
  auto scores = run_stage("score", timings, [&] {
    return cfg.method == ScoreMethod::abod ? abod_score(normalized.features) : score(normalized.features, w, m.cluster);
  });
  return run_stage("threshold", timings, [&] {
    if (!m.threshold) throw NumericError("model carries no calibrated threshold");
    DetectionResult r{scores, *m.threshold, apply_threshold(scores, *m.threshold),
                      std::string(detail::kPolicyNames.name(cfg.policy)), 0.0,
                      std::string(detail::kMethodNames.name(cfg.method))};
    r.policy_parameter = cfg.policy == ThresholdPolicy::fixed      ? cfg.value
                         : cfg.policy == ThresholdPolicy::quantile ? cfg.q
                                                                   : cfg.alpha;
    return r;
  });
}

}  // namespace detail

/// Learns the full pipeline state from `data`.
inline FittedModel fit(const Dataset& data, const PipelineConfig& cfg, Timings* timings = nullptr) {
  detail::run_stage("config", nullptr, [&] { cfg.validate(); });
  FittedModel m;
  m.config = cfg;
  m.feature_names = data.feature_names;

  auto clean = detail::run_stage("preprocess", timings, [&] {
    data.validate();
    m.fill_values = observed_means(data);
    for (std::size_t j = 0; j < m.fill_values.size(); ++j) {
      if (is_missing(m.fill_values[j])) throw DataError("feature '" + data.feature_names[j] + "' has no observed values");
    }
    Dataset c = impute_missing(data, cfg.impute);
    if (cfg.dedupe) c = dedupe(c);
    m.normalizer = fit_normalizer(c, cfg.normalize);
    return apply_normalizer(std::move(c), m.normalizer);
  });
  m.train_rows = clean.rows();

  const auto w = detail::run_stage("weighting", timings, [&] {
    if (cfg.scheme == WeightScheme::pattern_frequency) m.bin_ranges = fit_bin_ranges(clean.features);
    return detail::batch_weights(m, clean);
  });

  m.cluster = detail::run_stage("cluster", timings, [&] { return weighted_kmeans(clean.features, w, cfg.cluster); });
  m.train_objective = weighted_objective(clean.features, w, m.cluster);

  if (cfg.method != ScoreMethod::density) {
    m.threshold = detail::run_stage("calibrate", timings, [&] {
      switch (cfg.policy) {
        case ThresholdPolicy::fixed:
          return cfg.value;
        case ThresholdPolicy::chisq:
          return chisq_threshold_value(cfg.alpha, clean.dims());
        case ThresholdPolicy::quantile:
          break;
      }
      const auto s = cfg.method == ScoreMethod::abod ? abod_score(clean.features) : score(clean.features, w, m.cluster);
      return nearest_rank(s, cfg.q);
    });
  }
  return m;
}

/// Scores and flags a batch with a fitted model. Missing cells are filled with
/// the training means, so every input row yields exactly one result.
inline BatchResult apply(const FittedModel& m, const Dataset& data, Timings* timings = nullptr) {
  auto normalized = detail::run_stage("preprocess", timings, [&] {
    data.validate();
    if (data.dims() != m.dims()) {
      throw DataError("input has " + std::to_string(data.dims()) + " features, model expects " +
                      std::to_string(m.dims()));
    }
    return apply_normalizer(fill_missing(data, m.fill_values), m.normalizer);
  });
  BatchResult out;
  out.weights = detail::run_stage("weighting", timings, [&] { return detail::batch_weights(m, normalized); });
  out.detection = detail::score_and_threshold(m, normalized, out.weights, timings);
  if (data.labels) {
    out.metrics = detail::run_stage("evaluate", timings,
                                    [&] { return evaluate(out.detection.scores, out.detection.flags, *data.labels); });
  }
  return out;
}

struct DetectOutput {
  FittedModel model;
  BatchResult batch;
};

inline DetectOutput detect(const Dataset& data, const PipelineConfig& cfg, Timings* timings = nullptr) {
  DetectOutput out;
  out.model = fit(data, cfg, timings);
  out.batch = apply(out.model, data, timings);
  return out;
}

}  // namespace wod
