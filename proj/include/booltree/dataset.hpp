#pragma once

// Tabular data handling: strict CSV loading with column-kind inference,
// dense label mapping, 0/1 feature matrices for training, and seeded
// train/validation/test splits with on-disk manifests.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace booltree {

enum class ColumnKind { Numeric, Categorical };

struct RawColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<double> numeric;            // filled when kind == Numeric
  std::vector<std::string> categorical;   // filled when kind == Categorical
};

/// A loaded CSV: feature columns plus a dense label vector. Labels are
/// remapped to 0..n_classes-1 in order of first appearance; label_names
/// keeps the original tokens.
struct RawDataset {
  std::vector<RawColumn> columns;
  std::string label_column;
  std::vector<int> labels;
  std::vector<std::string> label_names;
  std::size_t n_rows = 0;

  int n_classes() const { return static_cast<int>(label_names.size()); }
};

/// Fully binarized data: row-major 0/1 matrix plus dense labels.
struct BinaryDataset {
  std::size_t n = 0;
  std::size_t n_features = 0;
  int n_classes = 0;
  std::vector<std::uint8_t> x;  // n * n_features, row-major
  std::vector<int> y;
  std::vector<long long> class_counts;
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;

  std::uint8_t at(std::size_t row, std::size_t feature) const {
    return x[row * n_features + feature];
  }

  long long count_of(int cls) const {
    return cls >= 0 && cls < static_cast<int>(class_counts.size()) ? class_counts[cls] : 0;
  }

  /// Binary convention throughout: class 1 is the positive class.
  long long positives() const { return count_of(1); }
  long long negatives() const { return count_of(0); }

  void recount() {
    class_counts.assign(std::max(n_classes, 1), 0);
    for (int cls : y) ++class_counts[cls];
  }

  /// Row-selection view used to materialize split partitions. Class space
  /// and naming are preserved even if a class is absent from the subset.
  BinaryDataset subset(const std::vector<std::size_t>& rows) const {
    BinaryDataset out;
    out.n = rows.size();
    out.n_features = n_features;
    out.n_classes = n_classes;
    out.feature_names = feature_names;
    out.label_names = label_names;
    out.x.reserve(rows.size() * n_features);
    out.y.reserve(rows.size());
    for (std::size_t r : rows) {
      for (std::size_t f = 0; f < n_features; ++f) out.x.push_back(at(r, f));
      out.y.push_back(y[r]);
    }
    out.recount();
    return out;
  }

  /// `require_two_classes` is on for anything used as a training set; split
  /// partitions used only for evaluation may legitimately be single-class.
  void validate(bool require_two_classes = true) const {
    if (n == 0) throw DataError("dataset has no rows");
    if (n_features == 0) throw DataError("dataset has no features");
    if (x.size() != n * n_features) throw DataError("feature matrix shape mismatch");
    if (y.size() != n) throw DataError("label vector length mismatch");
    for (std::uint8_t v : x)
      if (v > 1) throw DataError("feature matrix holds a non-binary value");
    for (int cls : y)
      if (cls < 0 || cls >= n_classes) throw DataError("label outside the declared class range");
    if (require_two_classes) {
      int distinct = 0;
      for (long long c : class_counts)
        if (c > 0) ++distinct;
      if (distinct < 2) throw DataError("fewer than two classes present");
    }
  }
};

/// Index partition of one dataset, produced by split_dataset.
struct DatasetSplit {
  std::vector<std::size_t> train, validation, test;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::vector<std::string>> read_csv_cells(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::char_traits<char>::eof() && !rows.empty()) break;
    rows.push_back(split(line, ','));
  }
  if (rows.empty()) throw DataError("empty file: " + path);
  return rows;
}

}  // namespace detail

/// Load a CSV with a header row. `schema` may pin specific columns to a kind;
/// unlisted columns are inferred (Numeric when every cell parses as a number).
/// Cells are never allowed to be empty: missing values are a hard error.
inline RawDataset load_csv(const std::string& path, const std::string& label_column,
                           const std::map<std::string, ColumnKind>& schema = {}) {
  auto cells = detail::read_csv_cells(path);
  const auto& header = cells[0];
  if (cells.size() < 2) throw DataError(path + ": no data rows");

  int label_idx = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (name == label_column) label_idx = static_cast<int>(c);
  }
  if (label_idx < 0) throw DataError(path + ": label column '" + label_column + "' not found");
  for (const auto& [name, kind] : schema) {
    (void)kind;
    bool found = false;
    for (const auto& h : header) found = found || trim(h) == name;
    if (!found) throw DataError(path + ": schema names unknown column '" + name + "'");
  }

  const std::size_t n_cols = header.size();
  const std::size_t n_rows = cells.size() - 1;
  for (std::size_t r = 1; r < cells.size(); ++r) {
    if (cells[r].size() != n_cols) {
      throw DataError(path + ": row " + std::to_string(r) + " has " +
                      std::to_string(cells[r].size()) + " cells, expected " +
                      std::to_string(n_cols));
    }
  }

  RawDataset out;
  out.label_column = trim(header[label_idx]);
  out.n_rows = n_rows;

  // Labels first: dense ids in first-appearance order.
  std::map<std::string, int> label_ids;
  for (std::size_t r = 1; r < cells.size(); ++r) {
    const std::string tok = trim(cells[r][label_idx]);
    if (tok.empty())
      throw DataError(path + ": row " + std::to_string(r) + ": empty label");
    auto it = label_ids.find(tok);
    if (it == label_ids.end()) {
      it = label_ids.emplace(tok, static_cast<int>(out.label_names.size())).first;
      out.label_names.push_back(tok);
    }
    out.labels.push_back(it->second);
  }
  if (out.label_names.size() < 2)
    throw DataError(path + ": fewer than two classes in label column");

  for (std::size_t c = 0; c < n_cols; ++c) {
    if (static_cast<int>(c) == label_idx) continue;
    RawColumn col;
    col.name = trim(header[c]);

    auto declared = schema.find(col.name);
    bool numeric;
    if (declared != schema.end()) {
      numeric = declared->second == ColumnKind::Numeric;
    } else {
      numeric = true;
      for (std::size_t r = 1; r < cells.size() && numeric; ++r) {
        double v;
        numeric = parse_double(cells[r][c], v);
      }
    }

    if (numeric) {
      col.kind = ColumnKind::Numeric;
      for (std::size_t r = 1; r < cells.size(); ++r) {
        double v;
        if (!parse_double(cells[r][c], v)) {
          throw DataError(path + ": row " + std::to_string(r) + ", column '" + col.name +
                          "': not numeric: '" + trim(cells[r][c]) + "'");
        }
        col.numeric.push_back(v);
      }
    } else {
      col.kind = ColumnKind::Categorical;
      for (std::size_t r = 1; r < cells.size(); ++r) {
        const std::string tok = trim(cells[r][c]);
        if (tok.empty())
          throw DataError(path + ": row " + std::to_string(r) + ", column '" + col.name +
                          "': missing value");
        col.categorical.push_back(tok);
      }
    }
    out.columns.push_back(std::move(col));
  }
  if (out.columns.empty()) throw DataError(path + ": no feature columns");
  return out;
}

/// Inverse of load_csv for RawDataset contents (values and label tokens).
inline void write_csv(const RawDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  for (const auto& col : data.columns) out << col.name << ',';
  out << data.label_column << '\n';
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    for (const auto& col : data.columns) {
      if (col.kind == ColumnKind::Numeric)
        out << format_g17(col.numeric[r]);
      else
        out << col.categorical[r];
      out << ',';
    }
    out << data.label_names[data.labels[r]] << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

/// Reorder the dense label space of a two-class dataset so that
/// `positive_name` becomes class 1.
inline void set_positive_label(RawDataset& data, const std::string& positive_name) {
  if (data.n_classes() != 2)
    throw DataError("positive-label override needs exactly two classes");
  int pos = -1;
  for (int k = 0; k < 2; ++k)
    if (data.label_names[k] == positive_name) pos = k;
  if (pos < 0) throw DataError("positive label '" + positive_name + "' not present");
  if (pos == 1) return;
  std::swap(data.label_names[0], data.label_names[1]);
  for (int& y : data.labels) y = 1 - y;
}

/// Interpret an all-numeric RawDataset whose every value is 0 or 1 as a
/// BinaryDataset. This is the loading path for pre-binarized training files.
inline BinaryDataset to_binary(const RawDataset& data) {
  BinaryDataset out;
  out.n = data.n_rows;
  out.n_features = data.columns.size();
  out.n_classes = data.n_classes();
  out.label_names = data.label_names;
  out.y = data.labels;
  out.x.assign(out.n * out.n_features, 0);
  for (std::size_t c = 0; c < data.columns.size(); ++c) {
    const auto& col = data.columns[c];
    out.feature_names.push_back(col.name);
    if (col.kind != ColumnKind::Numeric)
      throw DataError("column '" + col.name + "' is not numeric; binarize the data first");
    for (std::size_t r = 0; r < out.n; ++r) {
      const double v = col.numeric[r];
      if (v != 0.0 && v != 1.0)
        throw DataError("column '" + col.name + "' holds non-binary value " +
                        format_g17(v) + "; binarize the data first");
      out.x[r * out.n_features + c] = v == 1.0 ? 1 : 0;
    }
  }
  out.recount();
  out.validate();
  return out;
}

inline BinaryDataset load_binary_csv(const std::string& path, const std::string& label_column,
                                     const std::string& positive_label = "") {
  RawDataset raw = load_csv(path, label_column);
  if (!positive_label.empty()) set_positive_label(raw, positive_label);
  return to_binary(raw);
}

/// Seeded index partition. Validation and test take floor(fraction * n) rows
/// each; train receives the remainder. The shuffled order is consumed as
/// [train | validation | test] and each index list is returned sorted.
inline DatasetSplit split_dataset(std::size_t n, double train_fraction,
                                  double validation_fraction, double test_fraction,
                                  std::uint64_t seed) {
  if (train_fraction <= 0 || validation_fraction <= 0 || test_fraction <= 0)
    throw DataError("split fractions must be positive");
  const double sum = train_fraction + validation_fraction + test_fraction;
  if (std::abs(sum - 1.0) > 1e-9)
    throw DataError("split fractions must sum to 1");

  // The 1e-9 nudge keeps floor() stable when fraction*n lands a hair under an
  // integer (e.g. 0.1 * 30).
  const std::size_t n_val = static_cast<std::size_t>(std::floor(validation_fraction * n + 1e-9));
  const std::size_t n_test = static_cast<std::size_t>(std::floor(test_fraction * n + 1e-9));
  if (n_val + n_test >= n)
    throw DataError("split leaves no training rows");
  const std::size_t n_train = n - n_val - n_test;
  if (n_val == 0 || n_test == 0)
    throw DataError("split produces an empty partition");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SplitRng rng(seed);
  rng.shuffle(order);

  DatasetSplit out;
  out.seed = seed;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  out.test.assign(order.begin() + n_train + n_val, order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.validation.begin(), out.validation.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

inline void write_split(const DatasetSplit& split, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "seed " << split.seed << '\n';
  auto line = [&out](const char* name, const std::vector<std::size_t>& idx) {
    out << name;
    for (std::size_t i : idx) out << ' ' << i;
    out << '\n';
  };
  line("train", split.train);
  line("validation", split.validation);
  line("test", split.test);
  if (!out) throw DataError("write failed: " + path);
}

inline DatasetSplit read_split(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open split manifest: " + path);
  DatasetSplit out;
  std::string line;
  bool saw_train = false, saw_val = false, saw_test = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "seed") {
      if (!(ls >> out.seed)) throw FormatError(path + ": bad seed line");
    } else if (tag == "train" || tag == "validation" || tag == "test") {
      std::vector<std::size_t>& dst = tag == "train" ? out.train
                                      : tag == "validation" ? out.validation
                                                            : out.test;
      (tag == "train" ? saw_train : tag == "validation" ? saw_val : saw_test) = true;
      std::size_t v;
      while (ls >> v) dst.push_back(v);
    } else {
      throw FormatError(path + ": unknown manifest line '" + tag + "'");
    }
  }
  if (!saw_train || !saw_val || !saw_test)
    throw FormatError(path + ": manifest is missing a partition");
  return out;
}

}  // namespace booltree
