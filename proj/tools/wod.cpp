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

// wod: command-line front end for the weighted outlier detection pipeline.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 data error,
// 3 numeric failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wod/config.hpp"
#include "wod/data.hpp"
#include "wod/error.hpp"
#include "wod/evaluation.hpp"
#include "wod/pipeline.hpp"
#include "wod/report.hpp"
#include "wod/serialize.hpp"
#include "wod/streaming.hpp"
#include "wod/synth.hpp"

namespace {

using wod::ConfigError;
using wod::DataError;
using wod::Json;
using wod::PipelineConfig;

/// Options shared by the data-consuming subcommands.
struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string input;
  bool no_header = false;
  std::string label_column;
  std::string id_column;
  std::string weights_column;
  bool force = false;
  bool timing = false;
};

void add_config_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "Config file (flat JSON); defaults to $WOD_CONFIG");
  cmd->add_option("--set", o.overrides, "Override a config key: key=value (repeatable)");
  cmd->add_flag("--force", o.force, "Allow chi-square thresholds on weighted scores");
}

void add_data_options(CLI::App* cmd, CommonOptions& o, bool input_required = true) {
  auto* in = cmd->add_option("-i,--input", o.input, "Input CSV");
  if (input_required) in->required();
  cmd->add_flag("--no-header", o.no_header, "Input has no header row");
  cmd->add_option("--label-column", o.label_column, "Name of the 0/1 ground-truth column");
  cmd->add_option("--id-column", o.id_column, "Name of the row identifier column");
  cmd->add_option("--weights-column", o.weights_column,
                  "Use per-row weights from this column (exclusive with computed weighting schemes)");
  cmd->add_flag("--timing", o.timing, "Add per-stage wall-clock timings to the report");
}

/// File values, then --set overrides, then dedicated flags.
PipelineConfig resolve_config(const CommonOptions& o, std::optional<PipelineConfig> base = std::nullopt) {
  PipelineConfig cfg = base.value_or(PipelineConfig{});
  Json file = Json::object();
  std::string path = o.config_path;
  if (path.empty() && !base) {
    if (const char* env = std::getenv("WOD_CONFIG")) path = env;
  }
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    file = Json::parse(in, nullptr, false);
    if (file.is_discarded()) throw ConfigError("config file '" + path + "' is not valid JSON");
    cfg.merge(file);
  }
  for (const auto& a : o.overrides) cfg.set_assignment(a);
  if (o.no_header) cfg.has_header = false;
  if (!o.label_column.empty()) cfg.label_column = o.label_column;
  if (!o.id_column.empty()) cfg.id_column = o.id_column;
  if (!o.weights_column.empty()) {
    if (file.contains("weighting.scheme") && file["weighting.scheme"] != "column") {
      throw ConfigError("--weights-column conflicts with weighting.scheme=" + file["weighting.scheme"].dump() +
                        " in the config file");
    }
    cfg.scheme = wod::WeightScheme::column;
    cfg.weight_column = o.weights_column;
  }
  if (o.force) cfg.force = true;
  cfg.validate();
  return cfg;
}

/// Buffers outputs and publishes them only once every one is ready, each via
/// write-to-temporary then rename.
class OutputSet {
 public:
  void add(const std::string& path, std::string content) {
    if (!path.empty()) files_.emplace_back(path, std::move(content));
  }

  void commit() {
    for (const auto& [path, content] : files_) {
      if (path == "-") {
        std::cout << content;
        continue;
      }
      const std::string tmp = path + ".tmp";
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + tmp + "'");
        out << content;
        if (!out) throw DataError("write to '" + tmp + "' failed");
      }
      std::error_code ec;
      std::filesystem::rename(tmp, path, ec);
      if (ec) {
        std::filesystem::remove(tmp, ec);
        throw DataError("cannot move output into place at '" + path + "'");
      }
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string scores_csv(const wod::Dataset& data, const wod::DetectionResult& r) {
  std::ostringstream s;
  wod::write_scores_csv(s, data.row_ids, r);
  return s.str();
}

int cmd_detect(const CommonOptions& o, const std::string& output, const std::string& report) {
  const auto cfg = resolve_config(o);
  const auto data = wod::load_csv(o.input, cfg.csv_options());
  wod::Timings timings;
  const auto out = wod::detect(data, cfg, o.timing ? &timings : nullptr);
  OutputSet files;
  files.add(output, scores_csv(data, out.batch.detection));
  files.add(report, wod::dump_canonical(
                        wod::detect_report("detect", out.model, data, out.batch, o.timing ? &timings : nullptr)));
  files.commit();
  return 0;
}

int cmd_fit(const CommonOptions& o, const std::string& model_path, const std::string& report) {
  const auto cfg = resolve_config(o);
  const auto data = wod::load_csv(o.input, cfg.csv_options());
  wod::Timings timings;
  const auto model = wod::fit(data, cfg, o.timing ? &timings : nullptr);
  OutputSet files;
  files.add(model_path, wod::dump_canonical(wod::model_to_json(model)));
  if (!report.empty()) {
    Json j;
    j["command"] = "fit";
    j["config"] = cfg.to_json();
    j["dataset"] = wod::dataset_summary(data);
    j["model"] = wod::model_summary(model);
    if (o.timing) j["timing"] = wod::timings_to_json(timings);
    files.add(report, wod::dump_canonical(j));
  }
  files.commit();
  return 0;
}

int cmd_score(const CommonOptions& o, const std::string& model_path, const std::string& output,
              const std::string& report) {
  auto model = wod::load_model(model_path);
  // The fitted model fixes the pipeline; only data-reading options and the
  // report size may change here.
  CommonOptions data_only = o;
  data_only.config_path.clear();
  model.config = resolve_config(data_only, model.config);
  const auto data = wod::load_csv(o.input, model.config.csv_options());
  wod::Timings timings;
  const auto batch = wod::apply(model, data, o.timing ? &timings : nullptr);
  OutputSet files;
  files.add(output, scores_csv(data, batch.detection));
  files.add(report,
            wod::dump_canonical(wod::detect_report("score", model, data, batch, o.timing ? &timings : nullptr)));
  files.commit();
  return 0;
}

int cmd_eval(const CommonOptions& o, std::optional<std::size_t> folds, std::optional<std::uint64_t> seed,
             const std::string& report) {
  auto cfg = resolve_config(o);
  if (folds) cfg.folds = *folds;
  if (seed) cfg.eval_seed = *seed;
  cfg.validate();
  const auto data = wod::load_csv(o.input, cfg.csv_options());
  const auto cv = wod::cross_validate(data, cfg, cfg.folds, cfg.eval_seed);
  Json j;
  j["command"] = "eval";
  j["config"] = cfg.to_json();
  j["dataset"] = wod::dataset_summary(data);
  j["cv"] = wod::cv_to_json(cv);
  OutputSet files;
  files.add(report, wod::dump_canonical(j));
  files.commit();
  return 0;
}

int cmd_tune(const CommonOptions& o, const std::string& grid_json, const std::string& report, const std::string& table) {
  auto cfg = resolve_config(o);
  if (!grid_json.empty()) {
    Json g = Json::parse(grid_json, nullptr, false);
    if (g.is_discarded()) throw ConfigError("--grid is not valid JSON");
    cfg.set("tune.grid", g);
    cfg.validate();
  }
  const auto data = wod::load_csv(o.input, cfg.csv_options());
  const auto spec = wod::GridSpec::from_config(cfg);
  const auto result = wod::grid_search(data, cfg, spec);
  Json j;
  j["command"] = "tune";
  j["config"] = cfg.to_json();
  j["dataset"] = wod::dataset_summary(data);
  j["search"] = wod::grid_to_json(result, spec);
  std::ostringstream csv;
  wod::write_grid_csv(csv, result, spec);
  OutputSet files;
  files.add(report, wod::dump_canonical(j));
  files.add(table, csv.str());
  files.commit();
  return 0;
}

int cmd_stream(const CommonOptions& o, std::optional<std::size_t> capacity, const std::string& mode,
               std::optional<std::size_t> stride) {
  auto cfg = resolve_config(o);
  if (capacity) cfg.capacity = *capacity;
  if (!mode.empty()) cfg.set("stream.mode", mode);
  if (stride) cfg.stride = *stride;
  cfg.validate();

  std::istream* in = &std::cin;
  std::ifstream file;
  if (!o.input.empty() && o.input != "-") {
    file.open(o.input);
    if (!file) throw DataError("cannot open '" + o.input + "' for reading");
    in = &file;
  }
  const auto opts = cfg.csv_options();
  std::optional<wod::CsvSchema> schema;
  std::optional<wod::StreamDetector> detector;
  std::string line;
  std::size_t line_no = 0, row_no = 0;
  auto emit = [](const wod::WindowVerdict& v) { std::cout << wod::verdict_to_json(v).dump() << '\n' << std::flush; };
  while (std::getline(*in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (wod::trim(line).empty()) continue;
    const auto cells = wod::detail::split_csv_line(line);
    if (!schema) {
      schema.emplace(cells, opts, "<stream>");
      detector.emplace(cfg, schema->feature_names());
      if (opts.has_header) continue;
    }
    auto rec = schema->parse(cells, line_no);
    wod::StreamRow row{std::move(rec.features), rec.id ? *rec.id : std::to_string(row_no), rec.label, rec.weight};
    ++row_no;
    if (auto v = detector->push(std::move(row))) emit(*v);
  }
  if (detector) {
    const auto tail = detector->flush();
    if (tail.verdict) emit(*tail.verdict);
    if (tail.unprocessed > 0) {
      std::cerr << "wod stream: " << tail.unprocessed << " trailing rows left unprocessed (fewer than "
                << detector->min_partial_rows() << ")\n";
    }
  }
  return 0;
}

int cmd_synth(const wod::SynthSpec& spec, const std::string& output) {
  auto d = wod::make_synth(spec);
  std::ostringstream s;
  wod::write_csv(s, d);
  OutputSet files;
  files.add(output, s.str());
  files.commit();
  return 0;
}

int cmd_transform(const CommonOptions& o, const std::string& output) {
  const auto cfg = resolve_config(o);
  const auto data = wod::load_csv(o.input, cfg.csv_options());
  auto clean = wod::impute_missing(data, cfg.impute);
  if (cfg.dedupe) clean = wod::dedupe(clean);
  clean = wod::apply_normalizer(clean, wod::fit_normalizer(clean, cfg.normalize));
  std::ostringstream s;
  wod::write_csv(s, clean);
  OutputSet files;
  files.add(output, s.str());
  files.commit();
  return 0;
}

int report_error(const std::string& command, const char* kind, const std::exception& e, int code) {
  std::cerr << "wod " << command << ": " << kind << ": " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wod - weighted outlier detection"};
  app.require_subcommand(1);

  CommonOptions o;
  std::string output, report, model_path, table, grid, mode;
  std::optional<std::size_t> folds, capacity, stride;
  std::optional<std::uint64_t> seed;
  wod::SynthSpec synth;

  auto* detect = app.add_subcommand("detect", "Fit and score one file, writing row_id,score,flag");
  add_config_options(detect, o);
  add_data_options(detect, o);
  detect->add_option("-o,--output", output, "Per-row score CSV")->required();
  detect->add_option("-r,--report", report, "JSON report");

  auto* fit = app.add_subcommand("fit", "Fit the pipeline and save a model file");
  add_config_options(fit, o);
  add_data_options(fit, o);
  fit->add_option("-m,--model", model_path, "Model JSON to write")->required();
  fit->add_option("-r,--report", report, "JSON report");

  auto* score = app.add_subcommand("score", "Score a file with a saved model");
  add_data_options(score, o);
  score->add_option("--set", o.overrides, "Override a data or report key: key=value (repeatable)");
  score->add_option("-m,--model", model_path, "Model JSON to read")->required();
  score->add_option("-o,--output", output, "Per-row score CSV")->required();
  score->add_option("-r,--report", report, "JSON report");

  auto* eval = app.add_subcommand("eval", "k-fold cross-validation on labeled data");
  add_config_options(eval, o);
  add_data_options(eval, o);
  eval->add_option("-k,--folds", folds, "Fold count (eval.folds)");
  eval->add_option("--seed", seed, "Fold seed (eval.seed)");
  eval->add_option("-r,--report", report, "JSON report")->required();

  auto* tune = app.add_subcommand("tune", "Grid or random search with cross-validation");
  add_config_options(tune, o);
  add_data_options(tune, o);
  tune->add_option("--grid", grid, "Grid as JSON, e.g. '{\"cluster.k\":[2,3]}' (tune.grid)");
  tune->add_option("-r,--report", report, "JSON report")->required();
  tune->add_option("--table", table, "Result table CSV");

  auto* stream = app.add_subcommand("stream", "Windowed detection over CSV rows read from stdin");
  add_config_options(stream, o);
  add_data_options(stream, o, false);
  stream->add_option("--capacity", capacity, "Window size in rows (stream.capacity)");
  stream->add_option("--mode", mode, "tumbling or sliding (stream.mode)");
  stream->add_option("--stride", stride, "Rows evicted per sliding step (stream.stride)");

  auto* synth_cmd = app.add_subcommand("synth", "Write the labeled two-cluster benchmark CSV");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--inliers", synth.inliers, "Inlier count");
  synth_cmd->add_option("--outliers", synth.outliers, "Outlier count");
  synth_cmd->add_option("-o,--output", output, "Output CSV ('-' for stdout)")->required();

  auto* transform = app.add_subcommand("transform", "Impute, de-duplicate and normalize a CSV");
  add_config_options(transform, o);
  add_data_options(transform, o);
  transform->add_option("-o,--output", output, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "detect") return cmd_detect(o, output, report);
    if (command == "fit") return cmd_fit(o, model_path, report);
    if (command == "score") return cmd_score(o, model_path, output, report);
    if (command == "eval") return cmd_eval(o, folds, seed, report);
    if (command == "tune") return cmd_tune(o, grid, report, table);
    if (command == "stream") return cmd_stream(o, capacity, mode, stride);
    if (command == "synth") return cmd_synth(synth, output);
    if (command == "transform") return cmd_transform(o, output);
  } catch (const wod::ConfigError& e) {
    return report_error(command, "config error", e, 1);
  } catch (const wod::DataError& e) {
    return report_error(command, "data error", e, 2);
  } catch (const wod::NumericError& e) {
    return report_error(command, "numeric failure", e, 3);
  } catch (const std::exception& e) {
    return report_error(command, "error", e, 3);
  }
  return 1;
}
