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

// Dataset representation and the preprocessing stages that run before
// weighting: CSV ingestion, missing-value imputation, de-duplication,
// normalization and train/test splitting.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wod/error.hpp"
#include "wod/format.hpp"
#include "wod/random.hpp"

namespace wod {

/// Marker for a missing cell. Only ever present between ingestion and
/// imputation.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

/// n x d feature matrix plus per-row metadata. Row i of `features`, entry i of
/// `row_ids`, `labels` and `row_weights` always describe the same instance.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<std::string> feature_names;
  std::optional<std::vector<bool>> labels;  // true = outlier
  std::vector<std::string> row_ids;
  /// Per-row weights read from a CSV column (domain-knowledge weighting).
  std::optional<std::vector<double>> row_weights;

  // Column names to use when writing the dataset back out.
  std::string label_name = "label";
  std::optional<std::string> id_name;
  std::string weight_name = "weight";

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(features.cols()); }

  bool has_missing() const { return features.hasNaN(); }

  /// Subset of rows, in the order given.
  Dataset select_rows(std::span<const std::size_t> idx) const {
    Dataset out;
    out.feature_names = feature_names;
    out.label_name = label_name;
    out.id_name = id_name;
    out.weight_name = weight_name;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
    out.row_ids.reserve(idx.size());
    if (labels) out.labels.emplace().reserve(idx.size());
    if (row_weights) out.row_weights.emplace().reserve(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto i = idx[r];
      out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(i));
      out.row_ids.push_back(row_ids[i]);
      if (labels) out.labels->push_back((*labels)[i]);
      if (row_weights) out.row_weights->push_back((*row_weights)[i]);
    }
    return out;
  }

  /// Throws DataError unless the structural invariants hold.
  void validate() const {
    if (rows() == 0) throw DataError("dataset has no rows");
    if (dims() == 0) throw DataError("dataset has no feature columns");
    if (feature_names.size() != dims()) throw DataError("feature name count does not match columns");
    if (row_ids.size() != rows()) throw DataError("row id count does not match rows");
    if (labels && labels->size() != rows()) throw DataError("label count does not match rows");
    if (row_weights && row_weights->size() != rows()) throw DataError("weight count does not match rows");
  }
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvOptions {
  bool has_header = true;
  std::optional<std::string> label_column;
  std::optional<std::string> id_column;
  std::optional<std::string> weight_column;
};

namespace detail {

/// Splits one CSV record. Double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline bool parse_label(std::string_view text, bool& out) {
  text = trim(text);
  if (text == "1" || text == "true" || text == "TRUE" || text == "True") {
    out = true;
    return true;
  }
  if (text == "0" || text == "false" || text == "FALSE" || text == "False") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace detail

/// One parsed CSV data row.
struct CsvRecord {
  std::vector<double> features;  // kMissing for empty cells
  std::optional<bool> label;
  std::optional<std::string> id;
  std::optional<double> weight;
};

/// Column layout shared by batch loading and the streaming reader. Built from
/// the header line (or from the first record's width when there is none).
class CsvSchema {
 public:
  CsvSchema() = default;

  /// `header_cells` are the names when the file has a header; otherwise pass
  /// the first record and set has_header=false, which yields names c0, c1, ...
  CsvSchema(const std::vector<std::string>& header_cells, const CsvOptions& opts, std::string source)
      : source_(std::move(source)), width_(header_cells.size()) {
    std::vector<std::string> names;
    for (std::size_t c = 0; c < header_cells.size(); ++c) {
      names.push_back(opts.has_header ? std::string(trim(header_cells[c])) : "c" + std::to_string(c));
    }
    auto find_col = [&](const std::optional<std::string>& wanted, const char* what) -> std::optional<std::size_t> {
      if (!wanted) return std::nullopt;
      const auto it = std::find(names.begin(), names.end(), *wanted);
      if (it == names.end()) {
        throw DataError(source_ + ": " + what + " column '" + *wanted + "' not found in " +
                        (opts.has_header ? "header" : "columns"));
      }
      return static_cast<std::size_t>(it - names.begin());
    };
    label_col_ = find_col(opts.label_column, "label");
    id_col_ = find_col(opts.id_column, "id");
    weight_col_ = find_col(opts.weight_column, "weight");
    if (label_col_) label_name_ = names[*label_col_];
    if (id_col_) id_name_ = names[*id_col_];
    if (weight_col_) weight_name_ = names[*weight_col_];
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (c == label_col_ || c == id_col_ || c == weight_col_) continue;
      feature_cols_.push_back(c);
      feature_names_.push_back(names[c]);
    }
    if (feature_cols_.empty()) throw DataError(source_ + ": no feature columns");
  }

  std::size_t width() const { return width_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  bool has_labels() const { return label_col_.has_value(); }
  bool has_ids() const { return id_col_.has_value(); }
  bool has_weights() const { return weight_col_.has_value(); }
  const std::string& label_name() const { return label_name_; }
  const std::optional<std::string>& id_name() const { return id_name_; }
  const std::string& weight_name() const { return weight_name_; }

  /// `line_no` is the 1-based physical line, used in diagnostics.
  CsvRecord parse(const std::vector<std::string>& cells, std::size_t line_no) const {
    if (cells.size() != width_) {
      throw DataError(source_ + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " columns, expected " + std::to_string(width_));
    }
    auto where = [&](std::size_t c) {
      return source_ + ": row " + std::to_string(line_no) + ", column " + std::to_string(c + 1);
    };
    CsvRecord rec;
    rec.features.reserve(feature_cols_.size());
    for (const auto c : feature_cols_) {
      const auto text = trim(cells[c]);
      if (text.empty()) {
        rec.features.push_back(kMissing);
        continue;
      }
      double v = 0.0;
      if (!parse_double(text, v) || !std::isfinite(v)) {
        throw DataError(where(c) + ": non-numeric cell '" + std::string(text) + "'");
      }
      rec.features.push_back(v);
    }
    if (label_col_) {
      bool y = false;
      if (!detail::parse_label(cells[*label_col_], y)) {
        throw DataError(where(*label_col_) + ": label must be 0/1 or true/false, got '" +
                        std::string(trim(cells[*label_col_])) + "'");
      }
      rec.label = y;
    }
    if (id_col_) rec.id = std::string(trim(cells[*id_col_]));
    if (weight_col_) {
      double w = 0.0;
      const auto text = trim(cells[*weight_col_]);
      if (!parse_double(text, w) || !std::isfinite(w) || w <= 0.0) {
        throw DataError(where(*weight_col_) + ": weight must be a positive number, got '" + std::string(text) + "'");
      }
      rec.weight = w;
    }
    return rec;
  }

 private:
  std::string source_;
  std::size_t width_ = 0;
  std::vector<std::size_t> feature_cols_;
  std::vector<std::string> feature_names_;
  std::optional<std::size_t> label_col_, id_col_, weight_col_;
  std::string label_name_ = "label";
  std::optional<std::string> id_name_;
  std::string weight_name_ = "weight";
};

/// Assembles a Dataset from records sharing one schema. Rows without an id
/// column get their 0-based position as id.
inline Dataset assemble(const CsvSchema& schema, const std::vector<CsvRecord>& records) {
  Dataset d;
  d.feature_names = schema.feature_names();
  d.label_name = schema.label_name();
  d.id_name = schema.id_name();
  d.weight_name = schema.weight_name();
  const auto n = static_cast<Eigen::Index>(records.size());
  const auto dims = static_cast<Eigen::Index>(d.feature_names.size());
  d.features.resize(n, dims);
  if (schema.has_labels()) d.labels.emplace();
  if (schema.has_weights()) d.row_weights.emplace();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = records[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < dims; ++j) d.features(i, j) = rec.features[static_cast<std::size_t>(j)];
    d.row_ids.push_back(rec.id ? *rec.id : std::to_string(i));
    if (d.labels) d.labels->push_back(*rec.label);
    if (d.row_weights) d.row_weights->push_back(*rec.weight);
  }
  return d;
}

inline Dataset read_csv(std::istream& in, const CsvOptions& opts, const std::string& source = "<input>") {
  std::string line;
  std::size_t line_no = 0;
  std::optional<CsvSchema> schema;
  std::vector<CsvRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (!schema) {
      schema.emplace(cells, opts, source);
      if (opts.has_header) continue;
    }
    records.push_back(schema->parse(cells, line_no));
  }
  if (!schema) throw DataError(source + ": empty file");
  if (records.empty()) throw DataError(source + ": no data rows");
  return assemble(*schema, records);
}

inline Dataset load_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return read_csv(in, opts, path);
}

/// Writes the dataset in the same dialect `read_csv` accepts: optional id
/// column first, then features, then weight and label columns when present.
inline void write_csv(std::ostream& out, const Dataset& d) {
  std::vector<std::string> header;
  if (d.id_name) header.push_back(*d.id_name);
  header.insert(header.end(), d.feature_names.begin(), d.feature_names.end());
  if (d.row_weights) header.push_back(d.weight_name);
  if (d.labels) header.push_back(d.label_name);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << detail::csv_escape(header[c]);
  out << '\n';
  for (std::size_t i = 0; i < d.rows(); ++i) {
    bool first = true;
    auto cell = [&](const std::string& s) {
      out << (first ? "" : ",") << s;
      first = false;
    };
    if (d.id_name) cell(detail::csv_escape(d.row_ids[i]));
    for (std::size_t j = 0; j < d.dims(); ++j) {
      const double v = d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      cell(is_missing(v) ? std::string() : format_double(v));
    }
    if (d.row_weights) cell(format_double((*d.row_weights)[i]));
    if (d.labels) cell((*d.labels)[i] ? "1" : "0");
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------

enum class ImputeStrategy { drop_rows, feature_mean };

/// Mean of the observed (non-missing) values of each feature. Features with no
/// observed value yield kMissing.
inline std::vector<double> observed_means(const Dataset& d) {
  std::vector<double> means(d.dims(), kMissing);
  for (std::size_t j = 0; j < d.dims(); ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const double v = d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!is_missing(v)) {
        sum += v;
        ++count;
      }
    }
    if (count > 0) means[j] = sum / static_cast<double>(count);
  }
  return means;
}

/// Replaces every missing cell of feature j with fill[j].
inline Dataset fill_missing(Dataset d, std::span<const double> fill) {
  if (fill.size() != d.dims()) throw DataError("fill vector has wrong dimension");
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.features.cols(); ++j) {
      if (is_missing(d.features(i, j))) {
        const double f = fill[static_cast<std::size_t>(j)];
        if (is_missing(f)) throw DataError("feature '" + d.feature_names[static_cast<std::size_t>(j)] + "' has no observed values");
        d.features(i, j) = f;
      }
    }
  }
  return d;
}

inline Dataset impute_missing(const Dataset& d, ImputeStrategy strategy) {
  if (!d.has_missing()) return d;
  if (strategy == ImputeStrategy::feature_mean) {
    const auto means = observed_means(d);
    for (std::size_t j = 0; j < means.size(); ++j) {
      if (is_missing(means[j])) {
        throw DataError("feature '" + d.feature_names[j] + "' has no observed values; cannot impute mean");
      }
    }
    return fill_missing(d, means);
  }
  std::vector<std::size_t> keep;
  for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
    if (!d.features.row(i).hasNaN()) keep.push_back(static_cast<std::size_t>(i));
  }
  if (keep.empty()) throw DataError("every row has a missing value; drop_rows leaves no data");
  return d.select_rows(keep);
}

/// Collapses rows with bitwise-identical feature vectors onto their first
/// occurrence. Survivor order is preserved.
inline Dataset dedupe(const Dataset& d) {
  std::map<std::vector<std::uint64_t>, std::size_t> seen;
  std::vector<std::size_t> keep;
  std::vector<std::uint64_t> key(d.dims());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.dims(); ++j) {
      key[j] = std::bit_cast<std::uint64_t>(d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    if (seen.emplace(key, i).second) keep.push_back(i);
  }
  if (keep.size() == d.rows()) return d;
  return d.select_rows(keep);
}

/// Number of distinct feature vectors (bitwise comparison).
inline std::size_t distinct_rows(const Eigen::MatrixXd& x) {
  std::map<std::vector<std::uint64_t>, char> seen;
  std::vector<std::uint64_t> key(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) key[static_cast<std::size_t>(j)] = std::bit_cast<std::uint64_t>(x(i, j));
    seen.emplace(key, 0);
  }
  return seen.size();
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

enum class NormMethod { zscore, minmax, none };

/// Per-feature affine map x -> (x - offset) / spread. For zscore the offset is
/// the mean and the spread the population standard deviation; for minmax they
/// are the minimum and the range. A zero spread marks a constant feature,
/// which maps to 0.
struct NormalizationParams {
  NormMethod method = NormMethod::none;
  std::vector<double> offset;
  std::vector<double> spread;
};

inline NormalizationParams fit_normalizer(const Dataset& d, NormMethod method) {
  if (d.has_missing()) throw DataError("normalizer fitted on data with missing values");
  NormalizationParams p;
  p.method = method;
  if (method == NormMethod::none) return p;
  const auto n = static_cast<double>(d.rows());
  for (Eigen::Index j = 0; j < d.features.cols(); ++j) {
    const auto col = d.features.col(j);
    if (method == NormMethod::zscore) {
      double sum = 0.0;
      for (Eigen::Index i = 0; i < col.size(); ++i) sum += col(i);
      const double mean = sum / n;
      double ss = 0.0;
      for (Eigen::Index i = 0; i < col.size(); ++i) ss += (col(i) - mean) * (col(i) - mean);
      p.offset.push_back(mean);
      p.spread.push_back(std::sqrt(ss / n));
    } else {
      const double lo = col.minCoeff();
      const double hi = col.maxCoeff();
      p.offset.push_back(lo);
      p.spread.push_back(hi > lo ? hi - lo : 0.0);
    }
  }
  return p;
}

inline Dataset apply_normalizer(Dataset d, const NormalizationParams& p) {
  if (p.method == NormMethod::none) return d;
  if (p.offset.size() != d.dims()) {
    throw DataError("normalizer expects " + std::to_string(p.offset.size()) + " features, data has " +
                    std::to_string(d.dims()));
  }
  for (Eigen::Index j = 0; j < d.features.cols(); ++j) {
    const double off = p.offset[static_cast<std::size_t>(j)];
    const double spr = p.spread[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
      double& v = d.features(i, j);
      if (is_missing(v)) continue;
      v = spr > 0.0 ? (v - off) / spr : 0.0;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

/// Seeded random partition into (train, test); |train| = round(fraction * n).
/// Both sides keep the original relative row order.
inline std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed) {
  const std::size_t n = d.rows();
  if (n < 2) throw DataError("split needs at least 2 rows");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train == n) {
    throw DataError("train fraction " + format_double(train_fraction) + " leaves one side of the split empty");
  }
  Rng rng(seed);
  auto perm = permutation(n, rng);
  std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {d.select_rows(train), d.select_rows(test)};
}

}  // namespace wod
