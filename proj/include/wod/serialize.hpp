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

// JSON encoding of models and metrics.
//
// Output is canonical: object keys are sorted and doubles are written in the
// shortest form that parses back to the same value, so serialize -> parse ->
// serialize reproduces the same bytes.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wod/config.hpp"
#include "wod/metrics.hpp"
#include "wod/pipeline.hpp"

namespace wod {

inline constexpr const char* kModelFormat = "wod-model";
inline constexpr int kModelVersion = 1;

/// Canonical text form: two-space indent, trailing newline.
inline std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

inline Json metrics_to_json(const Metrics& m) {
  Json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["tn"] = m.tn;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["accuracy"] = m.accuracy;
  j["detection_rate"] = m.detection_rate;
  j["auc"] = m.auc ? Json(*m.auc) : Json(nullptr);
  return j;
}

namespace detail {

inline Json matrix_to_json(const Eigen::MatrixXd& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw DataError(std::string("model file: '") + what + "' has the wrong number of rows");
  }
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(std::string("model file: '") + what + "' has the wrong number of columns");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw DataError(std::string("model file: '") + what + "' holds a non-number");
      a(i, c) = v.get<double>();
    }
  }
  return a;
}

inline std::vector<double> vector_from_json(const Json& j, std::size_t size, const char* what) {
  if (!j.is_array() || j.size() != size) throw DataError(std::string("model file: '") + what + "' has the wrong length");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw DataError(std::string("model file: '") + what + "' holds a non-number");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

inline Json model_to_json(const FittedModel& m) {
  Json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["config"] = m.config.to_json();
  j["features"] = m.feature_names;
  j["preprocess"]["fill"] = m.fill_values;
  j["preprocess"]["normalize"] = {{"method", detail::kNormNames.name(m.normalizer.method)},
                                  {"offset", m.normalizer.offset},
                                  {"spread", m.normalizer.spread}};
  j["weighting"] = {{"scheme", detail::kSchemeNames.name(m.config.scheme)},
                    {"bin_lo", m.bin_ranges.lo},
                    {"bin_hi", m.bin_ranges.hi}};
  Json c;
  c["k"] = m.cluster.k;
  c["metric"] = detail::kMetricNames.name(m.cluster.metric);
  c["centers"] = detail::matrix_to_json(m.cluster.centers);
  c["covariances"] = Json::array();
  for (const auto& cov : m.cluster.covariances) c["covariances"].push_back(detail::matrix_to_json(cov));
  c["cluster_mass"] = m.cluster.cluster_mass;
  c["iterations"] = m.cluster.iterations;
  c["converged"] = m.cluster.converged;
  j["cluster"] = std::move(c);
  j["threshold"] = m.threshold ? Json(*m.threshold) : Json(nullptr);
  j["train_rows"] = m.train_rows;
  j["train_objective"] = m.train_objective;
  return j;
}

/// Inverse of model_to_json. Any structural problem is a DataError.
inline FittedModel model_from_json(const Json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kModelFormat) throw DataError("model file: not a wod model");
    if (j.at("version") != kModelVersion) throw DataError("model file: unsupported version");
    FittedModel m;
    try {
      m.config = PipelineConfig::from_json(j.at("config"));
    } catch (const ConfigError& e) {
      throw DataError(std::string("model file: bad config: ") + e.what());
    }
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    const std::size_t d = m.feature_names.size();
    if (d == 0) throw DataError("model file: no features");
    const auto& pre = j.at("preprocess");
    m.fill_values = detail::vector_from_json(pre.at("fill"), d, "preprocess.fill");
    const auto& norm = pre.at("normalize");
    m.normalizer.method = detail::kNormNames.parse("normalize.method", norm.at("method").get<std::string>());
    const std::size_t stats = m.normalizer.method == NormMethod::none ? 0 : d;
    m.normalizer.offset = detail::vector_from_json(norm.at("offset"), stats, "normalize.offset");
    m.normalizer.spread = detail::vector_from_json(norm.at("spread"), stats, "normalize.spread");
    const auto& wt = j.at("weighting");
    const std::size_t ranges = m.config.scheme == WeightScheme::pattern_frequency ? d : 0;
    m.bin_ranges.lo = detail::vector_from_json(wt.at("bin_lo"), ranges, "weighting.bin_lo");
    m.bin_ranges.hi = detail::vector_from_json(wt.at("bin_hi"), ranges, "weighting.bin_hi");
    const auto& c = j.at("cluster");
    m.cluster.k = c.at("k").get<std::size_t>();
    if (m.cluster.k == 0) throw DataError("model file: cluster.k is 0");
    m.cluster.metric = detail::kMetricNames.parse("cluster.metric", c.at("metric").get<std::string>());
    const auto k = static_cast<Eigen::Index>(m.cluster.k);
    const auto dd = static_cast<Eigen::Index>(d);
    m.cluster.centers = detail::matrix_from_json(c.at("centers"), k, dd, "cluster.centers");
    const auto& covs = c.at("covariances");
    if (!covs.is_array() || covs.size() != m.cluster.k) throw DataError("model file: covariance count mismatch");
    for (const auto& cov : covs) m.cluster.covariances.push_back(detail::matrix_from_json(cov, dd, dd, "cluster.covariances"));
    m.cluster.cluster_mass = detail::vector_from_json(c.at("cluster_mass"), m.cluster.k, "cluster.cluster_mass");
    m.cluster.iterations = c.at("iterations").get<std::size_t>();
    m.cluster.converged = c.at("converged").get<bool>();
    const auto& t = j.at("threshold");
    if (!t.is_null()) m.threshold = t.get<double>();
    m.train_rows = j.at("train_rows").get<std::size_t>();
    m.train_objective = j.at("train_objective").get<double>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

inline FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("model file '" + path + "' is not valid JSON");
  return model_from_json(j);
}

}  // namespace wod
