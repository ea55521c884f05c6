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

// PipelineConfig: every tunable of the pipeline in one place.
//
// On disk the config is a flat JSON object whose keys are dotted names such
// as "cluster.k". Unknown keys and ill-typed values are rejected. The same
// setter handles command-line overrides ("--set cluster.k=3") and grid-search
// cells, so every path goes through one validation routine.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wod/clustering.hpp"
#include "wod/data.hpp"
#include "wod/error.hpp"

namespace wod {

using Json = nlohmann::json;

enum class WeightScheme { uniform, pattern_frequency, knn_distance, column };
enum class ScoreMethod { weighted_mahalanobis, density, abod };
enum class ThresholdPolicy { fixed, quantile, chisq };
enum class StreamMode { tumbling, sliding };
enum class SearchMode { grid, random };

/// Upper bound on the streaming buffer, in rows.
inline constexpr std::size_t kMaxStreamCapacity = std::size_t{1} << 20;

namespace detail {

template <typename E, std::size_t N>
struct EnumNames {
  std::array<std::pair<E, std::string_view>, N> entries;

  std::string_view name(E e) const {
    for (const auto& [v, s] : entries)
      if (v == e) return s;
    return "?";
  }

  E parse(std::string_view key, std::string_view text) const {
    for (const auto& [v, s] : entries)
      if (s == text) return v;
    std::string allowed;
    for (const auto& [v, s] : entries) allowed += (allowed.empty() ? "" : ", ") + std::string(s);
    throw ConfigError("config key '" + std::string(key) + "': '" + std::string(text) + "' is not one of {" + allowed +
                      "}");
  }
};

inline constexpr EnumNames<ImputeStrategy, 2> kImputeNames{
    {{{ImputeStrategy::drop_rows, "drop_rows"}, {ImputeStrategy::feature_mean, "feature_mean"}}}};
inline constexpr EnumNames<NormMethod, 3> kNormNames{
    {{{NormMethod::zscore, "zscore"}, {NormMethod::minmax, "minmax"}, {NormMethod::none, "none"}}}};
inline constexpr EnumNames<WeightScheme, 4> kSchemeNames{{{{WeightScheme::uniform, "uniform"},
                                                           {WeightScheme::pattern_frequency, "pattern_frequency"},
                                                           {WeightScheme::knn_distance, "knn_distance"},
                                                           {WeightScheme::column, "column"}}}};
inline constexpr EnumNames<Metric, 2> kMetricNames{
    {{{Metric::euclidean, "euclidean"}, {Metric::mahalanobis, "mahalanobis"}}}};
inline constexpr EnumNames<ScoreMethod, 3> kMethodNames{{{{ScoreMethod::weighted_mahalanobis, "weighted_mahalanobis"},
                                                          {ScoreMethod::density, "density"},
                                                          {ScoreMethod::abod, "abod"}}}};
inline constexpr EnumNames<ThresholdPolicy, 3> kPolicyNames{{{{ThresholdPolicy::fixed, "fixed"},
                                                              {ThresholdPolicy::quantile, "quantile"},
                                                              {ThresholdPolicy::chisq, "chisq"}}}};
inline constexpr EnumNames<StreamMode, 2> kStreamNames{
    {{{StreamMode::tumbling, "tumbling"}, {StreamMode::sliding, "sliding"}}}};
inline constexpr EnumNames<SearchMode, 2> kSearchNames{{{{SearchMode::grid, "grid"}, {SearchMode::random, "random"}}}};

inline std::string expect_string(std::string_view key, const Json& v) {
  if (!v.is_string()) throw ConfigError("config key '" + std::string(key) + "' expects a string");
  return v.get<std::string>();
}

inline bool expect_bool(std::string_view key, const Json& v) {
  if (!v.is_boolean()) throw ConfigError("config key '" + std::string(key) + "' expects true or false");
  return v.get<bool>();
}

inline double expect_number(std::string_view key, const Json& v) {
  if (!v.is_number()) throw ConfigError("config key '" + std::string(key) + "' expects a number");
  return v.get<double>();
}

inline std::uint64_t expect_count(std::string_view key, const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError("config key '" + std::string(key) + "' expects a non-negative integer");
}

}  // namespace detail

struct PipelineConfig {
  // data.*
  bool has_header = true;
  std::string label_column;   // empty = unlabeled
  std::string id_column;      // empty = row position
  // preprocess.*
  ImputeStrategy impute = ImputeStrategy::feature_mean;
  bool dedupe = false;
  NormMethod normalize = NormMethod::zscore;
  // weighting.*
  WeightScheme scheme = WeightScheme::pattern_frequency;
  std::size_t bins = 8;
  std::size_t knn_k = 5;
  std::string weight_column;
  // cluster.*
  ClusterConfig cluster;
  // score.*
  ScoreMethod method = ScoreMethod::weighted_mahalanobis;
  double eps = 0.5;
  std::size_t min_pts = 5;
  // threshold.*
  ThresholdPolicy policy = ThresholdPolicy::quantile;
  double value = 3.0;
  double q = 0.95;
  double alpha = 0.05;
  bool force = false;
  // eval.* / tune.*
  std::size_t folds = 5;
  std::uint64_t eval_seed = 0;
  std::string tune_metric = "f1";
  Json tune_grid = Json::object();
  SearchMode search = SearchMode::grid;
  std::size_t samples = 10;
  // stream.*
  std::size_t capacity = 256;
  StreamMode stream_mode = StreamMode::tumbling;
  std::size_t stride = 64;
  // report.*
  std::size_t report_top = 10;

  /// Sets one key. Throws ConfigError naming the key when it is unknown or the
  /// value has the wrong type or spelling.
  void set(std::string_view key, const Json& v) {
    using namespace detail;
    if (key == "data.has_header") has_header = expect_bool(key, v);
    else if (key == "data.label_column") label_column = expect_string(key, v);
    else if (key == "data.id_column") id_column = expect_string(key, v);
    else if (key == "preprocess.impute") impute = kImputeNames.parse(key, expect_string(key, v));
    else if (key == "preprocess.dedupe") dedupe = expect_bool(key, v);
    else if (key == "preprocess.normalize") normalize = kNormNames.parse(key, expect_string(key, v));
    else if (key == "weighting.scheme") scheme = kSchemeNames.parse(key, expect_string(key, v));
    else if (key == "weighting.bins") bins = expect_count(key, v);
    else if (key == "weighting.k") knn_k = expect_count(key, v);
    else if (key == "weighting.column") weight_column = expect_string(key, v);
    else if (key == "cluster.k") cluster.k = expect_count(key, v);
    else if (key == "cluster.seed") cluster.seed = expect_count(key, v);
    else if (key == "cluster.max_iters") cluster.max_iters = expect_count(key, v);
    else if (key == "cluster.tol") cluster.tol = expect_number(key, v);
    else if (key == "cluster.ridge") cluster.ridge = expect_number(key, v);
    else if (key == "cluster.metric") cluster.metric = kMetricNames.parse(key, expect_string(key, v));
    else if (key == "score.method") method = kMethodNames.parse(key, expect_string(key, v));
    else if (key == "score.eps") eps = expect_number(key, v);
    else if (key == "score.min_pts") min_pts = expect_count(key, v);
    else if (key == "threshold.policy") policy = kPolicyNames.parse(key, expect_string(key, v));
    else if (key == "threshold.value") value = expect_number(key, v);
    else if (key == "threshold.q") q = expect_number(key, v);
    else if (key == "threshold.alpha") alpha = expect_number(key, v);
    else if (key == "threshold.force") force = expect_bool(key, v);
    else if (key == "eval.folds") folds = expect_count(key, v);
    else if (key == "eval.seed") eval_seed = expect_count(key, v);
    else if (key == "tune.metric") tune_metric = expect_string(key, v);
    else if (key == "tune.search") search = kSearchNames.parse(key, expect_string(key, v));
    else if (key == "tune.samples") samples = expect_count(key, v);
    else if (key == "tune.grid") {
      if (!v.is_object()) throw ConfigError("config key 'tune.grid' expects an object of value lists");
      tune_grid = v;
    } else if (key == "stream.capacity") capacity = expect_count(key, v);
    else if (key == "stream.mode") stream_mode = kStreamNames.parse(key, expect_string(key, v));
    else if (key == "stream.stride") stride = expect_count(key, v);
    else if (key == "report.top") report_top = expect_count(key, v);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
  }

  /// Parses "key=value"; the value is read as JSON when possible and as a bare
  /// string otherwise, so both cluster.k=3 and cluster.metric=mahalanobis work.
  void set_assignment(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
    const auto key = trim(assignment.substr(0, eq));
    const auto text = std::string(trim(assignment.substr(eq + 1)));
    Json v = Json::parse(text, nullptr, false);
    if (v.is_discarded()) v = text;
    set(key, v);
  }

  void merge(const Json& flat) {
    if (!flat.is_object()) throw ConfigError("config document must be a JSON object");
    for (const auto& [key, v] : flat.items()) set(key, v);
  }

  static PipelineConfig from_json(const Json& flat) {
    PipelineConfig c;
    c.merge(flat);
    return c;
  }

  static PipelineConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
    return from_json(j);
  }

  /// Effective configuration as a flat object with every key present.
  Json to_json() const {
    using namespace detail;
    Json j = Json::object();
    j["data.has_header"] = has_header;
    j["data.label_column"] = label_column;
    j["data.id_column"] = id_column;
    j["preprocess.impute"] = kImputeNames.name(impute);
    j["preprocess.dedupe"] = dedupe;
    j["preprocess.normalize"] = kNormNames.name(normalize);
    j["weighting.scheme"] = kSchemeNames.name(scheme);
    j["weighting.bins"] = bins;
    j["weighting.k"] = knn_k;
    j["weighting.column"] = weight_column;
    j["cluster.k"] = cluster.k;
    j["cluster.seed"] = cluster.seed;
    j["cluster.max_iters"] = cluster.max_iters;
    j["cluster.tol"] = cluster.tol;
    j["cluster.ridge"] = cluster.ridge;
    j["cluster.metric"] = kMetricNames.name(cluster.metric);
    j["score.method"] = kMethodNames.name(method);
    j["score.eps"] = eps;
    j["score.min_pts"] = min_pts;
    j["threshold.policy"] = kPolicyNames.name(policy);
    j["threshold.value"] = value;
    j["threshold.q"] = q;
    j["threshold.alpha"] = alpha;
    j["threshold.force"] = force;
    j["eval.folds"] = folds;
    j["eval.seed"] = eval_seed;
    j["tune.metric"] = tune_metric;
    j["tune.grid"] = tune_grid;
    j["tune.search"] = kSearchNames.name(search);
    j["tune.samples"] = samples;
    j["stream.capacity"] = capacity;
    j["stream.mode"] = kStreamNames.name(stream_mode);
    j["stream.stride"] = stride;
    j["report.top"] = report_top;
    return j;
  }

  CsvOptions csv_options() const {
    CsvOptions o;
    o.has_header = has_header;
    if (!label_column.empty()) o.label_column = label_column;
    if (!id_column.empty()) o.id_column = id_column;
    if (scheme == WeightScheme::column) o.weight_column = weight_column;
    return o;
  }

  /// Checks every field against the precondition of the module that uses it.
  /// Data-dependent checks (k against distinct rows, ...) happen later.
  void validate() const {
    if (bins < 2) throw ConfigError("weighting.bins must be >= 2");
    if (knn_k < 1) throw ConfigError("weighting.k must be >= 1");
    if (scheme == WeightScheme::column && weight_column.empty()) {
      throw ConfigError("weighting.scheme=column requires weighting.column");
    }
    if (scheme != WeightScheme::column && !weight_column.empty()) {
      throw ConfigError("weighting.column is only valid with weighting.scheme=column (schemes are exclusive)");
    }
    cluster.validate();
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("score.eps must be > 0");
    if (!std::isfinite(value)) throw ConfigError("threshold.value must be finite");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("threshold.q must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("threshold.alpha must lie in (0, 1)");
    if (policy == ThresholdPolicy::chisq && method != ScoreMethod::density && !force) {
      if (scheme != WeightScheme::uniform) {
        throw ConfigError("threshold.policy=chisq is only calibrated for unweighted scores; use weighting.scheme=uniform "
                          "or pass --force");
      }
      if (method != ScoreMethod::weighted_mahalanobis) {
        throw ConfigError("threshold.policy=chisq applies to Mahalanobis scores only; pass --force to override");
      }
    }
    if (folds < 2) throw ConfigError("eval.folds must be >= 2");
    static constexpr std::array<std::string_view, 6> metrics{"precision", "recall", "f1", "accuracy", "auc",
                                                             "detection_rate"};
    if (std::find(metrics.begin(), metrics.end(), tune_metric) == metrics.end()) {
      throw ConfigError("tune.metric '" + tune_metric + "' is not a known metric");
    }
    for (const auto& [key, values] : tune_grid.items()) {
      if (key.rfind("tune.", 0) == 0) throw ConfigError("tune.grid cannot vary '" + key + "'");
      if (!values.is_array() || values.empty()) {
        throw ConfigError("tune.grid entry '" + key + "' must be a non-empty list");
      }
      PipelineConfig probe = *this;
      for (const auto& v : values) probe.set(key, v);
    }
    if (search == SearchMode::random && samples < 1) throw ConfigError("tune.samples must be >= 1");
    if (capacity < 2 || capacity > kMaxStreamCapacity) {
      throw ConfigError("stream.capacity must lie in [2, " + std::to_string(kMaxStreamCapacity) + "]");
    }
    if (stream_mode == StreamMode::sliding && (stride < 1 || stride > capacity)) {
      throw ConfigError("stream.stride must lie in [1, stream.capacity]");
    }
  }
};

}  // namespace wod
