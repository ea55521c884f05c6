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

// Machine-readable outputs: per-row score CSV, JSON reports, stream verdicts.

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "wod/evaluation.hpp"
#include "wod/pipeline.hpp"
#include "wod/serialize.hpp"
#include "wod/streaming.hpp"

namespace wod {

/// `row_id,score,flag` with one line per row.
inline void write_scores_csv(std::ostream& out, const std::vector<std::string>& row_ids, const DetectionResult& r) {
  out << "row_id,score,flag\n";
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    out << detail::csv_escape(row_ids[i]) << ',' << format_double(r.scores[i]) << ',' << (r.flags[i] ? 1 : 0) << '\n';
  }
}

inline Json dataset_summary(const Dataset& d) {
  Json j;
  j["n"] = d.rows();
  j["d"] = d.dims();
  if (d.labels) {
    const auto pos = static_cast<std::size_t>(std::count(d.labels->begin(), d.labels->end(), true));
    j["outliers"] = pos;
    j["inliers"] = d.rows() - pos;
  } else {
    j["outliers"] = nullptr;
    j["inliers"] = nullptr;
  }
  return j;
}

/// Threshold, flag count and the `top` highest-scoring rows (ties keep input
/// order).
inline Json detection_summary(const DetectionResult& r, const std::vector<std::string>& row_ids, std::size_t top) {
  Json j;
  j["policy"] = r.policy;
  j["policy_parameter"] = r.policy_parameter;
  j["score_method"] = r.score_method;
  j["threshold"] = r.threshold ? Json(*r.threshold) : Json(nullptr);
  j["flag_count"] = r.flag_count();
  j["rows"] = r.flags.size();
  std::vector<std::size_t> order(r.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.scores[a] > r.scores[b]; });
  order.resize(std::min(top, order.size()));
  j["top"] = Json::array();
  for (auto i : order) {
    j["top"].push_back({{"row_id", row_ids[i]}, {"score", r.scores[i]}, {"flag", static_cast<bool>(r.flags[i])}});
  }
  return j;
}

inline Json timings_to_json(const Timings& t) {
  Json j = Json::array();
  for (const auto& [stage, seconds] : t) j.push_back({{"stage", stage}, {"seconds", seconds}});
  return j;
}

inline Json model_summary(const FittedModel& m) {
  return {{"iterations", m.cluster.iterations},
          {"converged", m.cluster.converged},
          {"k", m.cluster.k},
          {"train_rows", m.train_rows},
          {"objective", m.train_objective}};
}

inline Json detect_report(const std::string& command, const FittedModel& model, const Dataset& data,
                          const BatchResult& batch, const Timings* timings) {
  Json j;
  j["command"] = command;
  j["config"] = model.config.to_json();
  j["dataset"] = dataset_summary(data);
  j["detection"] = detection_summary(batch.detection, data.row_ids, model.config.report_top);
  j["model"] = model_summary(model);
  if (batch.metrics) j["metrics"] = metrics_to_json(*batch.metrics);
  if (timings) j["timing"] = timings_to_json(*timings);
  return j;
}

inline Json summary_to_json(const std::map<std::string, MetricSummary>& summary) {
  Json mean = Json::object(), stddev = Json::object();
  for (const auto& [name, s] : summary) {
    mean[name] = s.count ? Json(s.mean) : Json(nullptr);
    stddev[name] = s.count ? Json(s.stddev) : Json(nullptr);
  }
  return {{"mean", mean}, {"stddev", stddev}};
}

inline Json cv_to_json(const CvResult& cv) {
  Json j;
  j["folds"] = Json::array();
  for (const auto& f : cv.folds) {
    j["folds"].push_back({{"fold", f.fold},
                          {"train_rows", f.train_rows},
                          {"test_rows", f.test_rows},
                          {"metrics", metrics_to_json(f.metrics)}});
  }
  const auto s = summary_to_json(cv.summary);
  j["mean"] = s["mean"];
  j["stddev"] = s["stddev"];
  j["auc_missing_folds"] = cv.auc_missing;
  return j;
}

inline Json grid_to_json(const GridResult& g, const GridSpec& spec) {
  Json j;
  j["metric"] = spec.metric;
  j["cells_total"] = spec.cells();
  j["cells_evaluated"] = g.rows.size();
  j["rows"] = Json::array();
  for (const auto& row : g.rows) {
    Json params = Json::object();
    for (const auto& [k, v] : row.assignment) params[k] = v;
    const auto& s = row.cv.summary.at(spec.metric);
    j["rows"].push_back({{"index", row.index},
                         {"params", params},
                         {"mean", row.score ? Json(*row.score) : Json(nullptr)},
                         {"stddev", s.count ? Json(s.stddev) : Json(nullptr)}});
  }
  const auto& best = g.best_row();
  j["best"] = {{"index", best.index}, {"config", best.config.to_json()}, {"cv", cv_to_json(best.cv)}};
  return j;
}

/// index, one column per parameter (values in JSON text), metric mean and std.
inline void write_grid_csv(std::ostream& out, const GridResult& g, const GridSpec& spec) {
  out << "index";
  for (const auto& [k, v] : spec.params) out << ',' << detail::csv_escape(k);
  out << ',' << spec.metric << "_mean," << spec.metric << "_std\n";
  for (const auto& row : g.rows) {
    out << row.index;
    for (const auto& [k, v] : row.assignment) out << ',' << detail::csv_escape(v.is_string() ? v.get<std::string>() : v.dump());
    const auto& s = row.cv.summary.at(spec.metric);
    out << ',' << (row.score ? format_double(*row.score) : "") << ',' << (s.count ? format_double(s.stddev) : "") << '\n';
  }
}

inline Json verdict_to_json(const WindowVerdict& v) {
  Json j;
  j["window"] = v.window;
  j["partial"] = v.partial;
  j["row_ids"] = v.row_ids;
  j["scores"] = v.detection.scores.values;
  Json flags = Json::array();
  for (bool f : v.detection.flags) flags.push_back(f);
  j["flags"] = std::move(flags);
  j["flag_count"] = v.detection.flag_count();
  j["threshold"] = v.detection.threshold ? Json(*v.detection.threshold) : Json(nullptr);
  j["iterations"] = v.iterations;
  j["objective"] = v.objective;
  if (v.metrics) j["metrics"] = metrics_to_json(*v.metrics);
  return j;
}

}  // namespace wod
