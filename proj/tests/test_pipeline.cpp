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


#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wod/pipeline.hpp"
#include "wod/serialize.hpp"
#include "wod/synth.hpp"

namespace wod {
namespace {

Dataset synth_data(std::uint64_t seed = 7) {
  SynthSpec spec;
  spec.seed = seed;
  spec.inliers = 285;
  spec.outliers = 15;
  return make_synth(spec);
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(PipelineConfig{}.validate()); }

TEST(Config, UnknownKeyNamed) {
  PipelineConfig cfg;
  const auto msg = error_of([&] { cfg.set("cluster.kay", 3); });
  EXPECT_NE(msg.find("cluster.kay"), std::string::npos) << msg;
  EXPECT_THROW(cfg.set("cluster.kay", 3), ConfigError);
}

TEST(Config, TypeAndRangeErrors) {
  PipelineConfig cfg;
  EXPECT_THROW(cfg.set("cluster.k", "two"), ConfigError);
  EXPECT_THROW(cfg.set("cluster.k", -1), ConfigError);
  EXPECT_THROW(cfg.set("weighting.scheme", "bogus"), ConfigError);
  cfg.set("threshold.q", 1.5);
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, AssignmentsParseJsonValues) {
  PipelineConfig cfg;
  cfg.set_assignment("cluster.k=4");
  cfg.set_assignment("weighting.scheme=knn_distance");
  cfg.set_assignment("preprocess.dedupe=true");
  EXPECT_EQ(cfg.cluster.k, 4u);
  EXPECT_EQ(cfg.scheme, WeightScheme::knn_distance);
  EXPECT_TRUE(cfg.dedupe);
  EXPECT_THROW(cfg.set_assignment("no_equals_sign"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  PipelineConfig cfg;
  cfg.cluster.k = 3;
  cfg.cluster.metric = Metric::mahalanobis;
  cfg.q = 0.9;
  const auto back = PipelineConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
}

TEST(Config, ChisqRequiresUnweightedMahalanobis) {
  PipelineConfig cfg;
  cfg.policy = ThresholdPolicy::chisq;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.scheme = WeightScheme::uniform;
  EXPECT_NO_THROW(cfg.validate());
  cfg.scheme = WeightScheme::knn_distance;
  cfg.force = true;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, LoadFromFile) {
  const auto dir = testing::scratch_dir("config_load");
  testing::write_file(dir / "c.json", R"({"cluster.k": 3, "threshold.policy": "fixed", "threshold.value": 2.5})");
  const auto cfg = PipelineConfig::load((dir / "c.json").string());
  EXPECT_EQ(cfg.cluster.k, 3u);
  EXPECT_EQ(cfg.policy, ThresholdPolicy::fixed);
  EXPECT_EQ(cfg.value, 2.5);
  testing::write_file(dir / "bad.json", "{not json");
  EXPECT_THROW(PipelineConfig::load((dir / "bad.json").string()), ConfigError);
  testing::write_file(dir / "unknown.json", R"({"bogus.key": 1})");
  EXPECT_THROW(PipelineConfig::load((dir / "unknown.json").string()), ConfigError);
}

TEST(Pipeline, DetectProducesOneResultPerRow) {
  const auto d = synth_data();
  const auto out = detect(d, PipelineConfig{});
  EXPECT_EQ(out.batch.detection.scores.size(), d.rows());
  EXPECT_EQ(out.batch.detection.flags.size(), d.rows());
  ASSERT_TRUE(out.batch.metrics);
  EXPECT_EQ(out.batch.metrics->total(), d.rows());
  for (double s : out.batch.detection.scores.values) {
    EXPECT_TRUE(std::isfinite(s));
    EXPECT_GE(s, 0.0);
  }
}

TEST(Pipeline, FitApplyEqualsDetect) {
  const auto d = synth_data();
  for (auto scheme : {WeightScheme::uniform, WeightScheme::pattern_frequency, WeightScheme::knn_distance}) {
    PipelineConfig cfg;
    cfg.scheme = scheme;
    const auto a = detect(d, cfg);
    const auto b = apply(fit(d, cfg), d);
    EXPECT_EQ(a.batch.detection.scores.values, b.detection.scores.values);
    EXPECT_EQ(a.batch.detection.flags, b.detection.flags);
  }
}

TEST(Pipeline, EveryMethodAndPolicyRuns) {
  const auto d = synth_data();
  for (auto method : {ScoreMethod::weighted_mahalanobis, ScoreMethod::density, ScoreMethod::abod}) {
    for (auto policy : {ThresholdPolicy::fixed, ThresholdPolicy::quantile}) {
      PipelineConfig cfg;
      cfg.method = method;
      cfg.policy = policy;
      const auto out = detect(d, cfg);
      EXPECT_EQ(out.batch.detection.flags.size(), d.rows());
    }
  }
  PipelineConfig cfg;
  cfg.policy = ThresholdPolicy::chisq;
  cfg.scheme = WeightScheme::uniform;
  cfg.cluster.metric = Metric::mahalanobis;
  EXPECT_NO_THROW(detect(d, cfg));
}

TEST(Pipeline, Deterministic) {
  const auto d = synth_data();
  const auto a = detect(d, PipelineConfig{});
  const auto b = detect(d, PipelineConfig{});
  EXPECT_EQ(dump_canonical(model_to_json(a.model)), dump_canonical(model_to_json(b.model)));
  EXPECT_EQ(a.batch.detection.scores.values, b.batch.detection.scores.values);
}

TEST(Pipeline, MissingValuesKeepRowCount) {
  auto d = synth_data();
  d.features(3, 0) = kMissing;
  d.features(10, 1) = kMissing;
  PipelineConfig cfg;
  cfg.impute = ImputeStrategy::drop_rows;
  const auto model = fit(d, cfg);
  EXPECT_EQ(model.train_rows, d.rows() - 2);
  EXPECT_EQ(apply(model, d).detection.flags.size(), d.rows());
}

TEST(Pipeline, DimensionMismatchIsDataError) {
  const auto d = synth_data();
  const auto model = fit(d, PipelineConfig{});
  Rng rng(1);
  const auto other = testing::make_dataset(testing::random_matrix(20, 3, rng));
  EXPECT_THROW(apply(model, other), DataError);
}

TEST(Pipeline, ErrorsNameTheStage) {
  const auto d = synth_data();
  PipelineConfig cfg;
  cfg.cluster.k = 5000;
  const auto msg = error_of([&] { fit(d, cfg); });
  EXPECT_NE(msg.find("cluster"), std::string::npos) << msg;
}

TEST(Pipeline, TimingsRecorded) {
  const auto d = synth_data();
  Timings t;
  detect(d, PipelineConfig{}, &t);
  EXPECT_FALSE(t.empty());
  for (const auto& [stage, seconds] : t) EXPECT_GE(seconds, 0.0);
}

TEST(Pipeline, OutOfSampleScoring) {
  const auto train = synth_data(7);
  const auto test = synth_data(8);
  const auto model = fit(train, PipelineConfig{});
  const auto out = apply(model, test);
  EXPECT_EQ(out.detection.flags.size(), test.rows());
  EXPECT_EQ(*out.detection.threshold, *model.threshold);
  ASSERT_TRUE(out.metrics && out.metrics->auc);
  EXPECT_GT(*out.metrics->auc, 0.8);
}

TEST(Serialize, ModelRoundTripIsByteIdentical) {
  const auto d = synth_data();
  for (auto metric : {Metric::euclidean, Metric::mahalanobis}) {
    PipelineConfig cfg;
    cfg.cluster.metric = metric;
    cfg.cluster.k = 3;
    const auto model = fit(d, cfg);
    const auto text = dump_canonical(model_to_json(model));
    const auto back = model_from_json(Json::parse(text));
    EXPECT_EQ(dump_canonical(model_to_json(back)), text);
    const auto a = apply(model, d);
    const auto b = apply(back, d);
    EXPECT_EQ(a.detection.scores.values, b.detection.scores.values);
  }
}

TEST(Serialize, RejectsMalformedModels) {
  EXPECT_THROW(model_from_json(Json::parse(R"({"format":"other"})")), DataError);
  const auto d = synth_data();
  auto j = model_to_json(fit(d, PipelineConfig{}));
  j["cluster"]["centers"] = Json::array();
  EXPECT_THROW(model_from_json(j), DataError);
  const auto dir = testing::scratch_dir("bad_model");
  testing::write_file(dir / "m.json", "garbage");
  EXPECT_THROW(load_model((dir / "m.json").string()), DataError);
  EXPECT_THROW(load_model((dir / "missing.json").string()), DataError);
}

TEST(Serialize, MetricsJsonFields) {
  const auto j = metrics_to_json(confusion({true, false}, {true, false}));
  for (const char* key : {"tp", "fp", "fn", "tn", "precision", "recall", "f1", "accuracy", "detection_rate", "auc"})
    EXPECT_TRUE(j.contains(key)) << key;
}

}  // namespace
}  // namespace wod
