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

// Bounded row buffer that runs the batch pipeline whenever a window fills.
//
// Every window is an independent batch run: the model is refit from scratch
// with cluster.seed = base seed + window number (0-based), so a tumbling
// stream reproduces batch runs over the same slices exactly.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wod/config.hpp"
#include "wod/data.hpp"
#include "wod/pipeline.hpp"

namespace wod {

struct StreamRow {
  std::vector<double> features;
  std::string id;
  std::optional<bool> label;
  std::optional<double> weight;
};

struct WindowVerdict {
  std::size_t window = 0;  // sequence number, 0-based
  bool partial = false;    // emitted by flush() on a short buffer
  std::vector<std::string> row_ids;
  DetectionResult detection;
  std::optional<Metrics> metrics;
  std::size_t iterations = 0;
  double objective = 0.0;
};

struct FlushResult {
  std::optional<WindowVerdict> verdict;
  std::size_t unprocessed = 0;  // rows dropped because the buffer was too short
};

/// Per-window seed: base seed plus window number.
inline PipelineConfig window_config(const PipelineConfig& base, std::size_t window) {
  PipelineConfig cfg = base;
  cfg.cluster.seed = base.cluster.seed + window;
  return cfg;
}

/// Single-writer streaming detector. push() and flush() must not be called
/// concurrently on one instance.
class StreamDetector {
 public:
  StreamDetector(PipelineConfig cfg, std::vector<std::string> feature_names)
      : cfg_(std::move(cfg)), names_(std::move(feature_names)) {
    cfg_.validate();
    if (names_.empty()) throw ConfigError("stream needs at least one feature");
  }

  std::size_t capacity() const { return cfg_.capacity; }
  std::size_t buffered() const { return buffer_.size(); }
  std::size_t windows_emitted() const { return next_window_; }

  /// Minimum rows for a partial window at flush time.
  std::size_t min_partial_rows() const { return std::max(cfg_.cluster.k + 1, cfg_.min_pts + 1); }

  std::optional<WindowVerdict> push(StreamRow row) {
    if (row.features.size() != names_.size()) {
      throw DataError("stream row '" + row.id + "' has " + std::to_string(row.features.size()) +
                      " features, expected " + std::to_string(names_.size()));
    }
    buffer_.push_back(std::move(row));
    ++fresh_;
    if (buffer_.size() > cfg_.capacity) throw std::logic_error("stream buffer exceeded its capacity");
    if (buffer_.size() < cfg_.capacity) return std::nullopt;

    auto verdict = run_window(false);
    if (cfg_.stream_mode == StreamMode::tumbling) {
      buffer_.clear();
    } else {
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(cfg_.stride));
    }
    fresh_ = 0;
    return verdict;
  }

  /// Drains the buffer. Rows not yet covered by a verdict are processed as a
  /// partial window when there are enough of them.
  FlushResult flush() {
    FlushResult out;
    if (fresh_ > 0) {
      if (buffer_.size() >= min_partial_rows()) out.verdict = run_window(true);
      else out.unprocessed = fresh_;
    }
    buffer_.clear();
    fresh_ = 0;
    return out;
  }

  Dataset window_dataset() const {
    Dataset d;
    d.feature_names = names_;
    d.features.resize(static_cast<Eigen::Index>(buffer_.size()), static_cast<Eigen::Index>(names_.size()));
    const bool labeled = !buffer_.empty() && buffer_.front().label.has_value();
    const bool weighted = !buffer_.empty() && buffer_.front().weight.has_value();
    if (labeled) d.labels.emplace();
    if (weighted) d.row_weights.emplace();
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
      const auto& r = buffer_[i];
      for (std::size_t j = 0; j < names_.size(); ++j) {
        d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = r.features[j];
      }
      d.row_ids.push_back(r.id);
      if (labeled) d.labels->push_back(r.label.value_or(false));
      if (weighted) d.row_weights->push_back(r.weight.value_or(1.0));
    }
    return d;
  }

 private:
  WindowVerdict run_window(bool partial) {
    const Dataset window = window_dataset();
    const auto out = detect(window, window_config(cfg_, next_window_));
    WindowVerdict v;
    v.window = next_window_++;
    v.partial = partial;
    v.row_ids = window.row_ids;
    v.detection = out.batch.detection;
    v.metrics = out.batch.metrics;
    v.iterations = out.model.cluster.iterations;
    v.objective = out.model.train_objective;
    return v;
  }

  PipelineConfig cfg_;
  std::vector<std::string> names_;
  std::deque<StreamRow> buffer_;
  std::size_t fresh_ = 0;  // rows pushed since the last emitted window
  std::size_t next_window_ = 0;
};

}  // namespace wod
