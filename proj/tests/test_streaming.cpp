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


#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "wod/streaming.hpp"
#include "wod/synth.hpp"

namespace wod {
namespace {

std::vector<StreamRow> rows_of(const Dataset& d) {
  std::vector<StreamRow> out;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    StreamRow r;
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) r.features.push_back(d.features(static_cast<Eigen::Index>(i), j));
    r.id = d.row_ids[i];
    if (d.labels) r.label = (*d.labels)[i];
    out.push_back(std::move(r));
  }
  return out;
}

Dataset synth(std::size_t n) {
  SynthSpec spec;
  spec.inliers = n - n / 20;
  spec.outliers = n / 20;
  return make_synth(spec);
}

PipelineConfig stream_cfg(std::size_t capacity, StreamMode mode = StreamMode::tumbling, std::size_t stride = 1) {
  PipelineConfig cfg;
  cfg.capacity = capacity;
  cfg.stream_mode = mode;
  cfg.stride = stride;
  return cfg;
}

TEST(Stream, TumblingMatchesBatchPerWindow) {
  const auto d = synth(300);
  const auto cfg = stream_cfg(100);
  StreamDetector s(cfg, d.feature_names);
  std::vector<WindowVerdict> verdicts;
  for (auto& r : rows_of(d))
    if (auto v = s.push(r)) verdicts.push_back(*v);
  ASSERT_EQ(verdicts.size(), 3u);
  for (std::size_t w = 0; w < 3; ++w) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < 100; ++i) idx.push_back(100 * w + i);
    const auto batch = detect(d.select_rows(idx), window_config(cfg, w));
    EXPECT_EQ(verdicts[w].window, w);
    EXPECT_FALSE(verdicts[w].partial);
    EXPECT_EQ(verdicts[w].detection.scores.values, batch.batch.detection.scores.values);
    EXPECT_EQ(verdicts[w].detection.flags, batch.batch.detection.flags);
    EXPECT_EQ(*verdicts[w].detection.threshold, *batch.batch.detection.threshold);
    EXPECT_EQ(verdicts[w].row_ids.front(), d.row_ids[100 * w]);
    ASSERT_TRUE(verdicts[w].metrics);
  }
  EXPECT_EQ(s.buffered(), 0u);
}

TEST(Stream, SlidingEmitsAtExpectedPositions) {
  const auto d = synth(60);
  StreamDetector s(stream_cfg(20, StreamMode::sliding, 5), d.feature_names);
  std::vector<std::size_t> positions;
  const auto rows = rows_of(d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (auto v = s.push(rows[i])) {
      positions.push_back(i + 1);
      EXPECT_EQ(v->row_ids.size(), 20u);
      EXPECT_EQ(v->row_ids.back(), rows[i].id);
    }
  EXPECT_EQ(positions, (std::vector<std::size_t>{20, 25, 30, 35, 40, 45, 50, 55, 60}));
  EXPECT_EQ(s.buffered(), 15u);
  // All rows already belong to a window.
  const auto f = s.flush();
  EXPECT_FALSE(f.verdict);
  EXPECT_EQ(f.unprocessed, 0u);
}

TEST(Stream, TumblingWindowCount) {
  const auto d = synth(100);
  StreamDetector s(stream_cfg(30), d.feature_names);
  std::size_t emitted = 0;
  for (auto& r : rows_of(d)) emitted += s.push(r).has_value();
  EXPECT_EQ(emitted, 3u);
  EXPECT_EQ(s.buffered(), 10u);
  const auto f = s.flush();
  ASSERT_TRUE(f.verdict);
  EXPECT_TRUE(f.verdict->partial);
  EXPECT_EQ(f.verdict->row_ids.size(), 10u);
  EXPECT_EQ(f.verdict->window, 3u);
  EXPECT_EQ(s.buffered(), 0u);
}

TEST(Stream, ShortFlushReportsUnprocessed) {
  const auto d = synth(40);
  StreamDetector s(stream_cfg(30), d.feature_names);
  const auto rows = rows_of(d);
  for (std::size_t i = 0; i < 34; ++i) s.push(rows[i]);
  ASSERT_LT(4u, s.min_partial_rows());
  const auto f = s.flush();
  EXPECT_FALSE(f.verdict);
  EXPECT_EQ(f.unprocessed, 4u);
}

TEST(Stream, MemoryBounded) {
  const auto d = synth(200);
  StreamDetector s(stream_cfg(25, StreamMode::sliding, 3), d.feature_names);
  for (auto& r : rows_of(d)) {
    s.push(r);
    EXPECT_LE(s.buffered(), 25u);
  }
}

TEST(Stream, WrongWidthRejected) {
  StreamDetector s(stream_cfg(10), {"a", "b"});
  StreamRow r;
  r.features = {1.0};
  EXPECT_THROW(s.push(r), DataError);
}

TEST(Stream, ConfigValidation) {
  EXPECT_THROW(StreamDetector(stream_cfg(0), {"a"}), ConfigError);
  EXPECT_THROW(StreamDetector(stream_cfg(10, StreamMode::sliding, 11), {"a"}), ConfigError);
  EXPECT_THROW(StreamDetector(stream_cfg(10, StreamMode::sliding, 0), {"a"}), ConfigError);
}

TEST(Stream, WindowSeedsAdvance) {
  PipelineConfig base;
  base.cluster.seed = 40;
  EXPECT_EQ(window_config(base, 0).cluster.seed, 40u);
  EXPECT_EQ(window_config(base, 3).cluster.seed, 43u);
}

}  // namespace
}  // namespace wod
