#pragma once

// Feature binarization. Numeric columns are discretized with recursive
// entropy minimization under an MDL acceptance test (Fayyad-Irani style);
// each accepted interval becomes one indicator column. Categorical columns
// are one-hot encoded. Numeric columns that are already 0/1-valued pass
// through unchanged. The fitted map can be saved, reloaded, and applied to
// held-out rows, so validation/test data never influences cut selection.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace booltree {

namespace detail {

inline double entropy_bits(const std::vector<long long>& counts, long long total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (long long c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

inline int distinct_classes(const std::vector<long long>& counts) {
  int k = 0;
  for (long long c : counts)
    if (c > 0) ++k;
  return k;
}

}  // namespace detail

/// Cut thresholds for one numeric feature, strictly increasing. Rows with
/// value below the first cut fall in interval 0, and so on.
///
/// Selection: sort the values, group equal values, and consider as candidate
/// boundaries the midpoints between adjacent distinct values whose class
/// multisets differ. The candidate with the highest information gain is
/// accepted iff
///   gain > log2(N-1)/N + [log2(3^k - 2) - (k*H(S) - k1*H(S1) - k2*H(S2))]/N
/// where k, k1, k2 count the classes present in the node and its two halves.
/// Accepted cuts recurse into both halves. Gain ties pick the smaller
/// threshold.
inline std::vector<double> mdlp_cuts(std::span<const double> values,
                                     std::span<const int> labels) {
  if (values.size() != labels.size())
    throw DataError("mdlp_cuts: values and labels differ in length");
  if (values.size() < 2) return {};

  int n_classes = 0;
  for (int y : labels) {
    if (y < 0) throw DataError("mdlp_cuts: negative label");
    n_classes = std::max(n_classes, y + 1);
  }

  // Sort once, then collapse into groups of equal value with class counts.
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  struct Group {
    double value;
    std::vector<long long> counts;
    long long total = 0;
  };
  std::vector<Group> groups;
  for (std::size_t i : order) {
    if (groups.empty() || groups.back().value != values[i]) {
      groups.push_back({values[i], std::vector<long long>(n_classes, 0), 0});
    }
    ++groups.back().counts[labels[i]];
    ++groups.back().total;
  }

  std::vector<double> cuts;
  // Recurse on group ranges [lo, hi).
  auto recurse = [&](auto&& self, std::size_t lo, std::size_t hi) -> void {
    if (hi - lo < 2) return;
    std::vector<long long> total_counts(n_classes, 0);
    long long n = 0;
    for (std::size_t g = lo; g < hi; ++g) {
      for (int k = 0; k < n_classes; ++k) total_counts[k] += groups[g].counts[k];
      n += groups[g].total;
    }
    const double ent_s = detail::entropy_bits(total_counts, n);
    const int k_s = detail::distinct_classes(total_counts);

    double best_gain = 0.0;
    std::size_t best_g = 0;
    double best_threshold = 0.0;
    bool found = false;
    std::vector<long long> left_counts(n_classes, 0);
    long long left_n = 0;
    double best_ent1 = 0.0, best_ent2 = 0.0;
    int best_k1 = 0, best_k2 = 0;

    for (std::size_t g = lo + 1; g < hi; ++g) {
      for (int k = 0; k < n_classes; ++k) left_counts[k] += groups[g - 1].counts[k];
      left_n += groups[g - 1].total;
      if (groups[g - 1].counts == groups[g].counts) continue;  // same class multiset

      std::vector<long long> right_counts(n_classes);
      for (int k = 0; k < n_classes; ++k) right_counts[k] = total_counts[k] - left_counts[k];
      const long long right_n = n - left_n;
      const double ent1 = detail::entropy_bits(left_counts, left_n);
      const double ent2 = detail::entropy_bits(right_counts, right_n);
      const double gain = ent_s -
                          (static_cast<double>(left_n) / n) * ent1 -
                          (static_cast<double>(right_n) / n) * ent2;
      if (!found || gain > best_gain) {  // strict '>' keeps the smallest threshold on ties
        found = true;
        best_gain = gain;
        best_g = g;
        best_threshold = (groups[g - 1].value + groups[g].value) / 2.0;
        best_ent1 = ent1;
        best_ent2 = ent2;
        best_k1 = detail::distinct_classes(left_counts);
        best_k2 = detail::distinct_classes(right_counts);
      }
    }
    if (!found) return;

    const double delta = std::log2(std::pow(3.0, k_s) - 2.0) -
                         (k_s * ent_s - best_k1 * best_ent1 - best_k2 * best_ent2);
    const double threshold_bits =
        (std::log2(static_cast<double>(n - 1)) + delta) / static_cast<double>(n);
    if (best_gain <= threshold_bits) return;

    cuts.push_back(best_threshold);
    self(self, lo, best_g);
    self(self, best_g, hi);
  };
  recurse(recurse, 0, groups.size());

  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

/// One indicator column per distinct category, in first-appearance order.
inline std::vector<std::pair<std::string, std::vector<std::uint8_t>>> one_hot(
    std::span<const std::string> values) {
  std::vector<std::string> cats;
  std::map<std::string, std::size_t> index;
  for (const auto& v : values) {
    if (index.emplace(v, cats.size()).second) cats.push_back(v);
  }
  std::vector<std::pair<std::string, std::vector<std::uint8_t>>> out;
  for (const auto& c : cats) out.emplace_back(c, std::vector<std::uint8_t>(values.size(), 0));
  for (std::size_t i = 0; i < values.size(); ++i) out[index[values[i]]].second[i] = 1;
  return out;
}

enum class EncodingKind { Passthrough, Intervals, OneHot, Dropped };

/// How one source column maps to output columns.
struct FeatureEncoding {
  std::string source;
  EncodingKind kind = EncodingKind::Dropped;
  std::vector<double> cuts;              // Intervals
  std::vector<std::string> categories;   // OneHot, first-appearance order
  std::vector<std::string> emitted;      // output column names, in order
  std::string drop_reason;
};

/// A fitted binarization: per-column encodings in source-column order.
struct BinarizationMap {
  std::vector<FeatureEncoding> features;

  std::size_t output_width() const {
    std::size_t w = 0;
    for (const auto& f : features) w += f.emitted.size();
    return w;
  }

  void save(const std::string& path) const;
  static BinarizationMap load(const std::string& path);
};

namespace detail {

inline std::string interval_name(const std::string& src, const std::vector<double>& cuts,
                                 std::size_t interval) {
  std::ostringstream name;
  if (interval == 0) {
    name << src << '<' << format_g17(cuts.front());
  } else if (interval == cuts.size()) {
    name << src << ">=" << format_g17(cuts.back());
  } else {
    name << format_g17(cuts[interval - 1]) << "<=" << src << '<' << format_g17(cuts[interval]);
  }
  return name.str();
}

}  // namespace detail

/// Fit a binarization on the given rows (all rows when `rows` is empty).
/// Numeric columns whose observed values are all 0/1 pass through; other
/// numeric columns get MDL cuts (dropped when no cut is accepted);
/// categorical columns get one-hot columns (dropped when single-valued).
inline BinarizationMap fit_binarizer(const RawDataset& data,
                                     std::span<const std::size_t> rows = {}) {
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(data.n_rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    rows = all;
  }
  if (rows.empty()) throw DataError("fit_binarizer: no rows");

  BinarizationMap map;
  for (const auto& col : data.columns) {
    FeatureEncoding enc;
    enc.source = col.name;
    if (col.kind == ColumnKind::Numeric) {
      bool binary01 = true;
      for (std::size_t r : rows) {
        const double v = col.numeric[r];
        binary01 = binary01 && (v == 0.0 || v == 1.0);
      }
      if (binary01) {
        enc.kind = EncodingKind::Passthrough;
        enc.emitted = {col.name};
      } else {
        std::vector<double> values(rows.size());
        std::vector<int> labels(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          values[i] = col.numeric[rows[i]];
          labels[i] = data.labels[rows[i]];
        }
        enc.cuts = mdlp_cuts(values, labels);
        if (enc.cuts.empty()) {
          enc.kind = EncodingKind::Dropped;
          enc.drop_reason = "no informative cuts";
        } else {
          enc.kind = EncodingKind::Intervals;
          for (std::size_t iv = 0; iv <= enc.cuts.size(); ++iv)
            enc.emitted.push_back(detail::interval_name(col.name, enc.cuts, iv));
        }
      }
    } else {
      std::set<std::string> seen;
      for (std::size_t r : rows) {
        const auto& v = col.categorical[r];
        if (seen.insert(v).second) enc.categories.push_back(v);
      }
      if (enc.categories.size() < 2) {
        enc.kind = EncodingKind::Dropped;
        enc.drop_reason = "single category";
      } else {
        enc.kind = EncodingKind::OneHot;
        for (const auto& c : enc.categories) enc.emitted.push_back(col.name + "=" + c);
      }
    }
    map.features.push_back(std::move(enc));
  }
  if (map.output_width() == 0)
    throw DataError("no signal: every feature was dropped by binarization");
  return map;
}

/// Apply a fitted map to the given rows (all rows when `rows` is empty).
/// Categories unseen at fit time produce all-zero one-hot blocks.
inline BinaryDataset apply_binarizer(const BinarizationMap& map, const RawDataset& data,
                                     std::span<const std::size_t> rows = {}) {
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(data.n_rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    rows = all;
  }
  if (map.features.size() != data.columns.size())
    throw DataError("binarization map does not match the dataset's columns");

  BinaryDataset out;
  out.n = rows.size();
  out.n_classes = data.n_classes();
  out.label_names = data.label_names;
  for (const auto& enc : map.features)
    for (const auto& name : enc.emitted) out.feature_names.push_back(name);
  out.n_features = out.feature_names.size();
  out.x.assign(out.n * out.n_features, 0);
  out.y.reserve(out.n);
  for (std::size_t r : rows) out.y.push_back(data.labels[r]);

  std::size_t base = 0;
  for (std::size_t c = 0; c < map.features.size(); ++c) {
    const auto& enc = map.features[c];
    const auto& col = data.columns[c];
    if (enc.source != col.name)
      throw DataError("binarization map column '" + enc.source +
                      "' does not match dataset column '" + col.name + "'");
    switch (enc.kind) {
      case EncodingKind::Dropped:
        break;
      case EncodingKind::Passthrough: {
        if (col.kind != ColumnKind::Numeric)
          throw DataError("map expects numeric column '" + col.name + "'");
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const double v = col.numeric[rows[i]];
          if (v != 0.0 && v != 1.0)
            throw DataError("column '" + col.name + "' holds non-binary value " +
                            format_g17(v) + " but is mapped as passthrough");
          out.x[i * out.n_features + base] = v == 1.0 ? 1 : 0;
        }
        break;
      }
      case EncodingKind::Intervals: {
        if (col.kind != ColumnKind::Numeric)
          throw DataError("map expects numeric column '" + col.name + "'");
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const double v = col.numeric[rows[i]];
          std::size_t iv = 0;
          while (iv < enc.cuts.size() && v >= enc.cuts[iv]) ++iv;
          out.x[i * out.n_features + base + iv] = 1;
        }
        break;
      }
      case EncodingKind::OneHot: {
        if (col.kind != ColumnKind::Categorical)
          throw DataError("map expects categorical column '" + col.name + "'");
        std::map<std::string, std::size_t> index;
        for (std::size_t k = 0; k < enc.categories.size(); ++k) index[enc.categories[k]] = k;
        for (std::size_t i = 0; i < rows.size(); ++i) {
          auto it = index.find(col.categorical[rows[i]]);
          if (it != index.end()) out.x[i * out.n_features + base + it->second] = 1;
          // unseen category: leave the block all-zero
        }
        break;
      }
    }
    base += enc.emitted.size();
  }
  out.recount();
  out.validate(false);
  return out;
}

/// Fit on all rows and apply to all rows.
inline std::pair<BinaryDataset, BinarizationMap> binarize_dataset(const RawDataset& data) {
  BinarizationMap map = fit_binarizer(data);
  return {apply_binarizer(map, data), map};
}

// Map file format: a version line, then one tab-separated line per source
// column. Cut values use 17 significant digits so a reloaded map reproduces
// the fitted one bit-for-bit.
inline void BinarizationMap::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "binarization-map 1\n";
  for (const auto& enc : features) {
    out << enc.source << '\t';
    switch (enc.kind) {
      case EncodingKind::Passthrough:
        out << "passthrough";
        break;
      case EncodingKind::Intervals:
        out << "intervals";
        for (double c : enc.cuts) out << '\t' << format_g17(c);
        break;
      case EncodingKind::OneHot:
        out << "onehot";
        for (const auto& c : enc.categories) out << '\t' << c;
        break;
      case EncodingKind::Dropped:
        out << "dropped\t" << enc.drop_reason;
        break;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

inline BinarizationMap BinarizationMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open map file: " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "binarization-map 1")
    throw FormatError(path + ": missing 'binarization-map 1' header");
  BinarizationMap map;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < 2) throw FormatError(path + ": malformed map line: " + line);
    FeatureEncoding enc;
    enc.source = fields[0];
    const std::string& kind = fields[1];
    if (kind == "passthrough") {
      enc.kind = EncodingKind::Passthrough;
      enc.emitted = {enc.source};
    } else if (kind == "intervals") {
      enc.kind = EncodingKind::Intervals;
      for (std::size_t i = 2; i < fields.size(); ++i) {
        double v;
        if (!parse_double(fields[i], v))
          throw FormatError(path + ": bad cut value '" + fields[i] + "'");
        enc.cuts.push_back(v);
      }
      if (enc.cuts.empty()) throw FormatError(path + ": intervals line without cuts");
      for (std::size_t iv = 0; iv <= enc.cuts.size(); ++iv)
        enc.emitted.push_back(detail::interval_name(enc.source, enc.cuts, iv));
    } else if (kind == "onehot") {
      enc.kind = EncodingKind::OneHot;
      for (std::size_t i = 2; i < fields.size(); ++i) enc.categories.push_back(fields[i]);
      if (enc.categories.size() < 2) throw FormatError(path + ": onehot line needs 2+ categories");
      for (const auto& c : enc.categories) enc.emitted.push_back(enc.source + "=" + c);
    } else if (kind == "dropped") {
      enc.kind = EncodingKind::Dropped;
      for (std::size_t i = 2; i < fields.size(); ++i) {
        if (i > 2) enc.drop_reason += '\t';
        enc.drop_reason += fields[i];
      }
    } else {
      throw FormatError(path + ": unknown encoding kind '" + kind + "'");
    }
    map.features.push_back(std::move(enc));
  }
  return map;
}

}  // namespace booltree
