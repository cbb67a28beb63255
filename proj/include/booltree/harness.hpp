#pragma once

// Command-line harness: subcommand implementations, the benchmark protocol
// (split / grid-search / validation-selection / test-report), run records,
// and the argument parser. Everything lives in functions that take plain
// option structs and explicit streams so tests can drive them in-process;
// the installed binary is a thin main() over cli_main().

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "booltree/binarize.hpp"
#include "booltree/core.hpp"
#include "booltree/dataset.hpp"
#include "booltree/metrics.hpp"
#include "booltree/mip.hpp"
#include "booltree/solver.hpp"
#include "booltree/tree.hpp"

namespace booltree {

// ---------------------------------------------------------------------------
// Small shared helpers
// ---------------------------------------------------------------------------

/// Default wall-clock budget for one solve, by training-set size.
inline double default_budget_seconds(std::size_t n_rows) {
  if (n_rows < 1000) return 300.0;
  if (n_rows <= 5000) return 900.0;
  return 1800.0;
}

/// Worker count: an explicit flag wins, then the BOOLTREE_WORKERS environment
/// variable, then 1.
inline int resolve_workers(int flag_value) {
  if (flag_value != 0) {
    if (flag_value < 0) throw UsageError("worker count must be at least 1");
    return flag_value;
  }
  const char* env = std::getenv("BOOLTREE_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1 || v > 1'000'000)
    throw UsageError(std::string("BOOLTREE_WORKERS must be a positive integer, got '") + env +
                     "'");
  return static_cast<int>(v);
}

/// Write a whole file through a temporary sibling plus rename, so readers
/// never observe a half-written file.
inline void atomic_write_text(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write file: " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + path + ": " + ec.message());
}

namespace detail {

inline std::vector<std::string> tokens(const std::string& s) {
  std::string spaced = s;
  for (char& c : spaced)
    if (c == ',') c = ' ';
  std::istringstream in(spaced);
  std::vector<std::string> out;
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

inline long long parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw FormatError("trailing text");
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + " must be an integer, got '" + s + "'");
  }
}

inline double parse_seconds(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw FormatError("trailing text");
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + " must be a number of seconds, got '" + s + "'");
  }
}

inline bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw UsageError(what + " must be true or false, got '" + s + "'");
}

}  // namespace detail

/// Parse a rational-valued option, rewrapping parse failures as usage errors
/// that name the flag.
inline Rational parse_rational_flag(const std::string& text, const std::string& flag) {
  try {
    return parse_rational(text);
  } catch (const FormatError& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

/// Load a CSV of binary feature columns for prediction. A column whose name
/// matches `label_column` is dropped when present; every remaining cell must
/// be 0 or 1. The result carries no labels (y stays empty).
inline BinaryDataset load_features_csv(const std::string& path, const std::string& label_column) {
  auto cells = booltree::detail::read_csv_cells(path);
  const std::vector<std::string>& header = cells.front();
  std::size_t label_idx = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == label_column) label_idx = c;

  BinaryDataset out;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_idx) out.feature_names.push_back(header[c]);
  out.n_features = out.feature_names.size();
  if (out.n_features == 0) throw DataError("no feature columns in " + path);
  out.n = cells.size() - 1;
  if (out.n == 0) throw DataError("no data rows in " + path);
  out.n_classes = 0;
  out.x.reserve(out.n * out.n_features);
  for (std::size_t r = 1; r < cells.size(); ++r) {
    if (cells[r].size() != header.size())
      throw DataError("row " + std::to_string(r) + " has " + std::to_string(cells[r].size()) +
                      " cells, header has " + std::to_string(header.size()));
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c == label_idx) continue;
      const std::string cell = trim(cells[r][c]);
      if (cell == "0")
        out.x.push_back(0);
      else if (cell == "1")
        out.x.push_back(1);
      else
        throw DataError("cell '" + cell + "' in row " + std::to_string(r) +
                        " is not binary; binarize the data first");
    }
  }
  return out;
}

/// Write a binary dataset as CSV: feature columns then the label column,
/// labels rendered with their original names.
inline void write_binary_csv(const BinaryDataset& data, const std::string& label_column,
                             const std::string& path) {
  std::ostringstream out;
  for (std::size_t f = 0; f < data.n_features; ++f) out << data.feature_names[f] << ',';
  out << label_column << '\n';
  for (std::size_t i = 0; i < data.n; ++i) {
    for (std::size_t f = 0; f < data.n_features; ++f) out << int(data.at(i, f)) << ',';
    const int y = data.y[i];
    if (y >= 0 && std::size_t(y) < data.label_names.size() && !data.label_names[y].empty())
      out << data.label_names[y];
    else
      out << y;
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

/// One solve, with enough context to reproduce it and the headline numbers.
/// Serialized as a single JSON line.
struct RunRecord {
  std::string dataset;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  int n_classes = 0;
  bool has_seed = false;
  std::uint64_t seed = 0;
  int depth = 0;
  int max_rule_features = 0;
  int min_leaf_support = 0;
  Rational alpha{0};
  Rational cost_fp{1};
  Rational cost_fn{1};
  ObjectiveKind objective = ObjectiveKind::Accuracy;
  SolveStatus status = SolveStatus::Optimal;
  Rational objective_value{0};
  Rational gap{0};
  long long errors = 0;
  long long false_negatives = -1;
  long long false_positives = -1;
  int active_nodes = 0;
  int rule_feature_total = 0;
  bool has_train = false, has_validation = false, has_test = false;
  Rational train_metric{0}, validation_metric{0}, test_metric{0};
  double seconds = 0;
  int workers = 1;
};

inline std::string run_record_json(const RunRecord& r) {
  nlohmann::ordered_json j;
  j["dataset"] = r.dataset;
  j["rows"] = r.n_rows;
  j["features"] = r.n_features;
  j["classes"] = r.n_classes;
  if (r.has_seed) j["seed"] = r.seed;
  j["depth"] = r.depth;
  j["max_rule_features"] = r.max_rule_features;
  j["min_leaf_support"] = r.min_leaf_support;
  j["alpha"] = rational_string(r.alpha);
  if (r.objective == ObjectiveKind::CostSensitive) {
    j["cost_fp"] = rational_string(r.cost_fp);
    j["cost_fn"] = rational_string(r.cost_fn);
  }
  j["objective"] = objective_name(r.objective);
  j["status"] = solve_status_name(r.status);
  j["objective_value"] = rational_string(r.objective_value);
  j["objective_decimal"] = to_double(r.objective_value);
  j["gap"] = rational_string(r.gap);
  j["errors"] = r.errors;
  j["false_negatives"] = r.false_negatives;
  j["false_positives"] = r.false_positives;
  j["active_nodes"] = r.active_nodes;
  j["rule_feature_total"] = r.rule_feature_total;
  if (r.has_train) j["train_metric"] = rational_string(r.train_metric);
  if (r.has_validation) j["validation_metric"] = rational_string(r.validation_metric);
  if (r.has_test) j["test_metric"] = rational_string(r.test_metric);
  j["seconds"] = r.seconds;
  j["workers"] = r.workers;
  return j.dump();
}

inline void fill_solve_fields(RunRecord& r, const BinaryDataset& data, const HyperParams& hp,
                              ObjectiveKind obj, const SolveResult& res, int workers) {
  r.n_rows = data.n;
  r.n_features = data.n_features;
  r.n_classes = data.n_classes;
  r.depth = hp.depth;
  r.max_rule_features = hp.max_rule_features;
  r.min_leaf_support = hp.min_leaf_support;
  r.alpha = hp.alpha;
  r.cost_fp = hp.cost_fp;
  r.cost_fn = hp.cost_fn;
  r.objective = obj;
  r.status = res.status;
  r.objective_value = res.objective;
  r.gap = res.gap;
  r.errors = res.tallies.errors;
  r.false_negatives = res.tallies.false_negatives;
  r.false_positives = res.tallies.false_positives;
  r.active_nodes = res.tree.count_active();
  r.rule_feature_total = res.tree.total_rule_features();
  r.seconds = res.seconds;
  r.workers = workers;
}

// ---------------------------------------------------------------------------
// Held-out metrics
// ---------------------------------------------------------------------------

/// Evaluate a tree on one data partition with the objective's own metric.
/// `n_classes` comes from the full dataset so single-class partitions still
/// produce a well-shaped confusion matrix.
inline Rational partition_metric(ObjectiveKind obj, const BooleanTree& tree,
                                 const BinaryDataset& part, int n_classes, const Rational& cost_fp,
                                 const Rational& cost_fn) {
  const std::vector<int> pred = tree.predict_all(part);
  const ConfusionMatrix cm = confusion(part.y, pred, std::max(n_classes, 2));
  if (obj == ObjectiveKind::BalancedAccuracy && (cm.positives() == 0 || cm.negatives() == 0))
    throw DataError("a data partition lacks one of the two classes; balanced accuracy is "
                    "undefined on it");
  if (obj == ObjectiveKind::F1 && cm.positives() == 0)
    throw DataError("a data partition has no positive instances; f1 is undefined on it");
  return objective_metric(obj, cm, cost_fp, cost_fn);
}

// ---------------------------------------------------------------------------
// Benchmark protocol
// ---------------------------------------------------------------------------

struct GridPoint {
  int depth = 1;
  Rational alpha{0};
  int max_rule_features = 1;
};

struct BenchmarkConfig {
  std::string data_path;
  std::string label_column = "label";
  std::string positive_label;
  ObjectiveKind objective = ObjectiveKind::Accuracy;
  std::vector<int> depths;
  std::vector<Rational> alphas = {Rational(0)};
  std::vector<int> fmax_values;  // 0 means "all features"
  int min_leaf_support = 1;
  Rational cost_fp{1};
  Rational cost_fn{1};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  double budget_seconds = 0;  // 0 = size-based default per run
  std::string out_dir;
  bool no_split = false;
  std::string dataset_name;  // defaults to the data file's stem
};

/// Parse a plain-text benchmark config: `key = value` lines, `#` comments,
/// optional `[section]` headers (ignored). Lists accept spaces or commas.
inline BenchmarkConfig parse_benchmark_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  BenchmarkConfig cfg;
  bool saw_depths = false, saw_fmax = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (value.empty())
      throw UsageError(path + ":" + std::to_string(lineno) + ": empty value for '" + key + "'");

    if (key == "data") {
      cfg.data_path = value;
    } else if (key == "label") {
      cfg.label_column = value;
    } else if (key == "positive_label") {
      cfg.positive_label = value;
    } else if (key == "name") {
      cfg.dataset_name = value;
    } else if (key == "objective") {
      cfg.objective = parse_objective(value);
    } else if (key == "depths") {
      cfg.depths.clear();
      for (const std::string& s : detail::tokens(value))
        cfg.depths.push_back(static_cast<int>(detail::parse_int(s, "depths")));
      saw_depths = true;
    } else if (key == "alphas") {
      cfg.alphas.clear();
      for (const std::string& s : detail::tokens(value))
        cfg.alphas.push_back(parse_rational_flag(s, "alphas"));
    } else if (key == "fmax") {
      cfg.fmax_values.clear();
      for (const std::string& s : detail::tokens(value))
        cfg.fmax_values.push_back(static_cast<int>(detail::parse_int(s, "fmax")));
      saw_fmax = true;
    } else if (key == "smin") {
      cfg.min_leaf_support = static_cast<int>(detail::parse_int(value, "smin"));
    } else if (key == "cost_fp") {
      cfg.cost_fp = parse_rational_flag(value, "cost_fp");
    } else if (key == "cost_fn") {
      cfg.cost_fn = parse_rational_flag(value, "cost_fn");
    } else if (key == "seeds") {
      cfg.seeds.clear();
      for (const std::string& s : detail::tokens(value))
        cfg.seeds.push_back(static_cast<std::uint64_t>(detail::parse_int(s, "seeds")));
    } else if (key == "budget") {
      cfg.budget_seconds = detail::parse_seconds(value, "budget");
      if (cfg.budget_seconds <= 0) throw UsageError("budget must be positive");
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "no_split") {
      cfg.no_split = detail::parse_bool(value, "no_split");
    } else {
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown config key '" + key +
                       "'");
    }
  }
  if (cfg.data_path.empty()) throw UsageError("config is missing the 'data' key");
  if (!saw_depths || cfg.depths.empty()) throw UsageError("config is missing the 'depths' key");
  if (cfg.alphas.empty()) throw UsageError("config has an empty 'alphas' list");
  if (!saw_fmax || cfg.fmax_values.empty()) cfg.fmax_values = {0};
  if (cfg.seeds.empty()) throw UsageError("config has an empty 'seeds' list");
  if (cfg.dataset_name.empty())
    cfg.dataset_name = std::filesystem::path(cfg.data_path).stem().string();
  return cfg;
}

/// The grid in its canonical order: depth ascending, then alpha ascending,
/// then rule-size cap ascending. Validation ties go to the earliest point.
inline std::vector<GridPoint> benchmark_grid(const BenchmarkConfig& cfg) {
  std::vector<int> depths = cfg.depths;
  std::vector<Rational> alphas = cfg.alphas;
  std::vector<int> fmaxes = cfg.fmax_values;
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  std::sort(fmaxes.begin(), fmaxes.end());
  fmaxes.erase(std::unique(fmaxes.begin(), fmaxes.end()), fmaxes.end());
  std::vector<GridPoint> grid;
  for (int d : depths)
    for (const Rational& a : alphas)
      for (int f : fmaxes) grid.push_back(GridPoint{d, a, f});
  return grid;
}

struct BenchmarkRun {
  std::uint64_t seed = 0;
  GridPoint point;
  RunRecord record;
  BooleanTree tree;
};

struct SeedSelection {
  std::uint64_t seed = 0;
  std::size_t run_index = 0;  // into BenchmarkReport::runs
};

struct BenchmarkReport {
  std::string dataset_name;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  int n_classes = 0;
  ObjectiveKind objective = ObjectiveKind::Accuracy;
  std::vector<GridPoint> grid;
  std::vector<BenchmarkRun> runs;         // seed-major, grid order within a seed
  std::vector<SeedSelection> selections;  // one per seed
  Rational mean_train{0};
  Rational mean_validation{0};
  Rational mean_test{0};
};

/// Run the full protocol: per seed, split 50/25/25 (or reuse the whole set
/// three times with `no_split`), solve every grid point on the training part
/// within its budget, pick the configuration with the best validation metric
/// (earliest grid point on ties), and report its test metric. Means are over
/// the selected run of each seed. `on_run`, when set, sees each finished run
/// immediately so partial results can be flushed.
inline BenchmarkReport run_benchmark(const BinaryDataset& data, const BenchmarkConfig& cfg,
                                     int workers, std::ostream* progress,
                                     const std::function<void(const BenchmarkRun&)>& on_run = {}) {
  data.validate(false);
  BenchmarkReport rep;
  rep.dataset_name = cfg.dataset_name;
  rep.n_rows = data.n;
  rep.n_features = data.n_features;
  rep.n_classes = data.n_classes;
  rep.objective = cfg.objective;
  rep.grid = benchmark_grid(cfg);
  if (rep.grid.empty()) throw UsageError("the benchmark grid is empty");
  const bool lower = metric_lower_is_better(cfg.objective);

  Rational sum_train{0}, sum_val{0}, sum_test{0};
  for (const std::uint64_t seed : cfg.seeds) {
    BinaryDataset train, validation, test;
    if (cfg.no_split) {
      train = data;
      validation = data;
      test = data;
    } else {
      const DatasetSplit sp = split_dataset(data.n, 0.5, 0.25, 0.25, seed);
      train = data.subset(sp.train);
      validation = data.subset(sp.validation);
      test = data.subset(sp.test);
    }

    std::size_t best = std::size_t(-1);
    Rational best_metric{0};
    for (const GridPoint& g : rep.grid) {
      HyperParams hp;
      hp.depth = g.depth;
      hp.max_rule_features =
          g.max_rule_features == 0 ? static_cast<int>(data.n_features) : g.max_rule_features;
      hp.min_leaf_support = cfg.min_leaf_support;
      hp.alpha = g.alpha;
      hp.cost_fp = cfg.cost_fp;
      hp.cost_fn = cfg.cost_fn;
      SolveOptions opt;
      opt.workers = workers;
      opt.budget_seconds =
          cfg.budget_seconds > 0 ? cfg.budget_seconds : default_budget_seconds(train.n);

      const SolveResult res = solve(train, hp, cfg.objective, opt);

      BenchmarkRun run;
      run.seed = seed;
      run.point = g;
      run.tree = canonicalize(res.tree);
      run.record.dataset = cfg.dataset_name;
      run.record.has_seed = true;
      run.record.seed = seed;
      fill_solve_fields(run.record, train, hp, cfg.objective, res, workers);
      run.record.n_classes = data.n_classes;
      run.record.has_train = run.record.has_validation = run.record.has_test = true;
      run.record.train_metric = partition_metric(cfg.objective, run.tree, train, data.n_classes,
                                                 cfg.cost_fp, cfg.cost_fn);
      run.record.validation_metric = partition_metric(cfg.objective, run.tree, validation,
                                                      data.n_classes, cfg.cost_fp, cfg.cost_fn);
      run.record.test_metric = partition_metric(cfg.objective, run.tree, test, data.n_classes,
                                                cfg.cost_fp, cfg.cost_fn);

      rep.runs.push_back(std::move(run));
      const BenchmarkRun& stored = rep.runs.back();
      if (on_run) on_run(stored);
      if (progress != nullptr)
        *progress << "seed " << seed << " depth " << g.depth << " alpha "
                  << rational_string(g.alpha) << " fmax " << hp.max_rule_features << ": "
                  << solve_status_name(stored.record.status) << ", objective "
                  << format_g17(stored.record.objective_value) << ", validation "
                  << format_g17(stored.record.validation_metric) << ", "
                  << format_g17(stored.record.seconds) << "s\n";

      const Rational m = stored.record.validation_metric;
      const bool better =
          best == std::size_t(-1) || (lower ? m < best_metric : m > best_metric);
      if (better) {
        best = rep.runs.size() - 1;
        best_metric = m;
      }
    }
    rep.selections.push_back(SeedSelection{seed, best});
    sum_train += rep.runs[best].record.train_metric;
    sum_val += rep.runs[best].record.validation_metric;
    sum_test += rep.runs[best].record.test_metric;
  }

  const Rational k(static_cast<long long>(cfg.seeds.size()));
  rep.mean_train = sum_train / k;
  rep.mean_validation = sum_val / k;
  rep.mean_test = sum_test / k;
  return rep;
}

inline std::string benchmark_runs_csv_header() {
  return "dataset,rows,features,classes,objective,seed,depth,alpha,max_rule_features,"
         "min_leaf_support,status,objective_value,gap,train_metric,validation_metric,"
         "test_metric,seconds\n";
}

inline std::string benchmark_runs_csv_row(const BenchmarkRun& run) {
  const RunRecord& r = run.record;
  std::ostringstream out;
  out << r.dataset << ',' << r.n_rows << ',' << r.n_features << ',' << r.n_classes << ','
      << objective_name(r.objective) << ',' << r.seed << ',' << r.depth << ','
      << rational_string(r.alpha) << ',' << r.max_rule_features << ',' << r.min_leaf_support
      << ',' << solve_status_name(r.status) << ',' << rational_string(r.objective_value) << ','
      << rational_string(r.gap) << ',' << rational_string(r.train_metric) << ','
      << rational_string(r.validation_metric) << ',' << rational_string(r.test_metric) << ','
      << format_g17(r.seconds) << '\n';
  return out.str();
}

/// One deterministic summary row: identity columns plus means of the
/// objective's metric over the selected run of each seed. Nothing
/// time-dependent appears here, so rerunning the same protocol on the same
/// data reproduces the file byte for byte.
inline std::string benchmark_summary_csv(const BenchmarkReport& rep) {
  std::ostringstream out;
  out << "dataset,rows,features,classes,objective,seeds,mean_train_metric,"
         "mean_validation_metric,mean_test_metric\n";
  out << rep.dataset_name << ',' << rep.n_rows << ',' << rep.n_features << ',' << rep.n_classes
      << ',' << objective_name(rep.objective) << ',' << rep.selections.size() << ','
      << format_g17(rep.mean_train) << ',' << format_g17(rep.mean_validation) << ','
      << format_g17(rep.mean_test) << '\n';
  return out.str();
}

inline std::string benchmark_summary_text(const BenchmarkReport& rep) {
  std::ostringstream out;
  out << "dataset " << rep.dataset_name << " (" << rep.n_rows << " rows, " << rep.n_features
      << " features, " << rep.n_classes << " classes)\n";
  out << "objective " << objective_name(rep.objective) << "\n";
  out << "grid " << rep.grid.size() << " points, seeds " << rep.selections.size() << "\n";
  for (const SeedSelection& sel : rep.selections) {
    const BenchmarkRun& run = rep.runs[sel.run_index];
    out << "seed " << sel.seed << ": depth " << run.point.depth << " alpha "
        << rational_string(run.point.alpha) << " fmax " << run.record.max_rule_features
        << " -> train " << format_g17(run.record.train_metric) << ", validation "
        << format_g17(run.record.validation_metric) << ", test "
        << format_g17(run.record.test_metric) << "\n";
  }
  out << "mean train " << format_g17(rep.mean_train) << " (" << rational_string(rep.mean_train)
      << ")\n";
  out << "mean validation " << format_g17(rep.mean_validation) << " ("
      << rational_string(rep.mean_validation) << ")\n";
  out << "mean test " << format_g17(rep.mean_test) << " (" << rational_string(rep.mean_test)
      << ")\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct BinarizeOptions {
  std::string data_path;
  std::string label_column = "label";
  std::string positive_label;
  std::string out_path;
  std::string map_path;
};

inline int cmd_binarize(const BinarizeOptions& o, std::ostream&, std::ostream& err) {
  RawDataset raw = load_csv(o.data_path, o.label_column);
  if (!o.positive_label.empty()) set_positive_label(raw, o.positive_label);
  auto [bin, map] = binarize_dataset(raw);
  write_binary_csv(bin, o.label_column, o.out_path);
  if (!o.map_path.empty()) map.save(o.map_path);
  err << "wrote " << bin.n << " rows with " << bin.n_features << " binary features to "
      << o.out_path << "\n";
  return 0;
}

struct TrainOptions {
  std::string data_path;
  std::string label_column = "label";
  std::string positive_label;
  int depth = 2;
  int max_rule_features = 0;  // 0 = all features
  int min_leaf_support = 1;
  std::string alpha = "0";
  std::string cost_fp = "1";
  std::string cost_fn = "1";
  std::string objective = "accuracy";
  double budget_seconds = 0;  // 0 = size-based default
  bool budget_given = false;
  int workers = 0;
  std::string model_path;
  std::string report_path;  // empty = stdout
  std::string lp_path;      // empty = skip
};

inline int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  if (o.budget_given && o.budget_seconds <= 0) throw UsageError("budget must be positive");
  const ObjectiveKind obj = parse_objective(o.objective);
  const BinaryDataset data = load_binary_csv(o.data_path, o.label_column, o.positive_label);

  HyperParams hp;
  hp.depth = o.depth;
  hp.max_rule_features =
      o.max_rule_features == 0 ? static_cast<int>(data.n_features) : o.max_rule_features;
  hp.min_leaf_support = o.min_leaf_support;
  hp.alpha = parse_rational_flag(o.alpha, "alpha");
  hp.cost_fp = parse_rational_flag(o.cost_fp, "cost-fp");
  hp.cost_fn = parse_rational_flag(o.cost_fn, "cost-fn");

  SolveOptions opt;
  opt.workers = resolve_workers(o.workers);
  opt.budget_seconds = o.budget_given ? o.budget_seconds : default_budget_seconds(data.n);

  const SolveResult res = solve(data, hp, obj, opt);
  const BooleanTree canon = canonicalize(res.tree);
  save_tree(canon, o.model_path);
  if (!o.lp_path.empty()) {
    const ModelSpec m = build_model(data, hp, obj);
    emit_lp(m, o.lp_path);
  }

  RunRecord rec;
  rec.dataset = o.data_path;
  fill_solve_fields(rec, data, hp, obj, res, opt.workers);
  rec.has_train = true;
  rec.train_metric = partition_metric(obj, canon, data, data.n_classes, hp.cost_fp, hp.cost_fn);
  const std::string line = run_record_json(rec);
  if (o.report_path.empty())
    out << line << "\n";
  else
    atomic_write_text(o.report_path, line + "\n");

  err << "status " << solve_status_name(res.status) << ", objective "
      << format_g17(res.objective) << " (" << rational_string(res.objective) << "), "
      << res.tree.count_active() << " active rules, " << format_g17(res.seconds) << "s\n";
  return res.status == SolveStatus::Optimal ? 0 : 4;
}

struct PredictOptions {
  std::string model_path;
  std::string data_path;
  std::string label_column = "label";
  std::string out_path;  // empty = stdout
};

inline int cmd_predict(const PredictOptions& o, std::ostream& out, std::ostream&) {
  const BooleanTree tree = load_tree(o.model_path);
  const BinaryDataset data = load_features_csv(o.data_path, o.label_column);
  if (data.n_features != tree.n_features)
    throw DataError("the model expects " + std::to_string(tree.n_features) +
                    " features, the data has " + std::to_string(data.n_features));
  std::ostringstream text;
  text << "prediction\n";
  for (std::size_t i = 0; i < data.n; ++i)
    text << tree.predict({data.x.data() + i * data.n_features, data.n_features}) << "\n";
  if (o.out_path.empty())
    out << text.str();
  else
    atomic_write_text(o.out_path, text.str());
  return 0;
}

struct EvaluateOptions {
  std::string model_path;
  std::string data_path;
  std::string label_column = "label";
  std::string positive_label;
  std::string cost_fp = "1";
  std::string cost_fn = "1";
};

inline int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream&) {
  const BooleanTree tree = load_tree(o.model_path);
  const BinaryDataset data = load_binary_csv(o.data_path, o.label_column, o.positive_label);
  if (data.n_features != tree.n_features)
    throw DataError("the model expects " + std::to_string(tree.n_features) +
                    " features, the data has " + std::to_string(data.n_features));
  const Rational cfp = parse_rational_flag(o.cost_fp, "cost-fp");
  const Rational cfn = parse_rational_flag(o.cost_fn, "cost-fn");
  const std::vector<int> pred = tree.predict_all(data);
  const int k = std::max({data.n_classes, tree.n_classes, 2});
  const ConfusionMatrix cm = confusion(data.y, pred, k);

  auto line = [&out](const char* name, const Rational& v) {
    out << name << ' ' << format_g17(v) << " (" << rational_string(v) << ")\n";
  };
  out << "rows " << data.n << "\n";
  line("accuracy", accuracy(cm));
  if (k == 2) {
    if (cm.positives() > 0 && cm.negatives() > 0)
      line("balanced_accuracy", balanced_accuracy(cm));
    else
      out << "balanced_accuracy n/a (needs both classes present)\n";
    if (cm.positives() > 0)
      line("f1", f1(cm));
    else
      out << "f1 n/a (needs at least one positive instance)\n";
    line("mean_error_cost", mec(cm, cfp, cfn) / Rational(static_cast<long long>(data.n)));
  } else {
    out << "balanced_accuracy n/a (needs two classes)\n";
    out << "f1 n/a (needs two classes)\n";
    out << "mean_error_cost n/a (needs two classes)\n";
  }
  out << "confusion " << k << "x" << k << " (rows = true class, columns = predicted)\n";
  for (int t = 0; t < k; ++t) {
    out << "true_" << t;
    for (int p = 0; p < k; ++p) out << ' ' << cm.at(t, p);
    out << "\n";
  }
  return 0;
}

struct EmitLpOptions {
  std::string data_path;
  std::string label_column = "label";
  std::string positive_label;
  int depth = 2;
  int max_rule_features = 0;
  int min_leaf_support = 1;
  std::string alpha = "0";
  std::string cost_fp = "1";
  std::string cost_fn = "1";
  std::string objective = "accuracy";
  std::string out_path;
};

inline HyperParams hyperparams_from(const EmitLpOptions& o, const BinaryDataset& data) {
  HyperParams hp;
  hp.depth = o.depth;
  hp.max_rule_features =
      o.max_rule_features == 0 ? static_cast<int>(data.n_features) : o.max_rule_features;
  hp.min_leaf_support = o.min_leaf_support;
  hp.alpha = parse_rational_flag(o.alpha, "alpha");
  hp.cost_fp = parse_rational_flag(o.cost_fp, "cost-fp");
  hp.cost_fn = parse_rational_flag(o.cost_fn, "cost-fn");
  return hp;
}

inline int cmd_emit_lp(const EmitLpOptions& o, std::ostream&, std::ostream& err) {
  const ObjectiveKind obj = parse_objective(o.objective);
  const BinaryDataset data = load_binary_csv(o.data_path, o.label_column, o.positive_label);
  const HyperParams hp = hyperparams_from(o, data);
  const ModelSpec m = build_model(data, hp, obj);
  emit_lp(m, o.out_path);
  err << "wrote " << m.variables.size() << " variables, " << m.constraints.size()
      << " constraints to " << o.out_path << "\n";
  return 0;
}

struct SolveExternalOptions {
  EmitLpOptions model;  // same data + hyper-parameter surface
  std::string solution_path;
  std::string lp_path;  // optional cross-check
  std::string model_out;
  std::string report_path;  // empty = stdout
};

inline int cmd_solve_external(const SolveExternalOptions& o, std::ostream& out,
                              std::ostream& err) {
  const ObjectiveKind obj = parse_objective(o.model.objective);
  const BinaryDataset data =
      load_binary_csv(o.model.data_path, o.model.label_column, o.model.positive_label);
  const HyperParams hp = hyperparams_from(o.model, data);
  const ModelSpec m = build_model(data, hp, obj);

  if (!o.lp_path.empty()) {
    const ModelSpec from_file = read_lp(o.lp_path);
    // Reading an LP discovers variables in text order, so compare the name
    // sets rather than positions.
    auto names = [](const ModelSpec& spec) {
      std::vector<std::string> v;
      v.reserve(spec.variables.size());
      for (const VarDecl& d : spec.variables) v.push_back(d.name);
      std::sort(v.begin(), v.end());
      return v;
    };
    const bool same = from_file.constraints.size() == m.constraints.size() &&
                      from_file.maximize == m.maximize && names(from_file) == names(m);
    if (!same)
      throw UsageError("the file " + o.lp_path +
                       " does not match the model built from this data and these parameters");
  }

  const Assignment a = parse_solution(m, o.solution_path);
  const CheckReport check = check_assignment(m, a);
  if (!check.feasible) {
    err << "solution rejected, " << check.violations.size() << " violations:\n";
    for (const std::string& v : check.violations) err << "  " << v << "\n";
    throw InfeasibleError("the solution does not satisfy the model");
  }

  const BooleanTree tree = canonicalize(extract_tree(m, a));
  save_tree(tree, o.model_out);

  RunRecord rec;
  rec.dataset = o.model.data_path;
  rec.n_rows = data.n;
  rec.n_features = data.n_features;
  rec.n_classes = data.n_classes;
  rec.depth = hp.depth;
  rec.max_rule_features = hp.max_rule_features;
  rec.min_leaf_support = hp.min_leaf_support;
  rec.alpha = hp.alpha;
  rec.cost_fp = hp.cost_fp;
  rec.cost_fn = hp.cost_fn;
  rec.objective = obj;
  rec.status = SolveStatus::Optimal;  // feasibility checked; optimality is the solver's claim
  rec.objective_value = check.objective;
  rec.gap = Rational(0);
  rec.active_nodes = tree.count_active();
  rec.rule_feature_total = tree.total_rule_features();
  rec.has_train = true;
  rec.train_metric = partition_metric(obj, tree, data, data.n_classes, hp.cost_fp, hp.cost_fn);
  const std::string line = run_record_json(rec);
  if (o.report_path.empty())
    out << line << "\n";
  else
    atomic_write_text(o.report_path, line + "\n");

  err << "accepted solution with objective " << format_g17(check.objective) << " ("
      << rational_string(check.objective) << "), saved tree to " << o.model_out << "\n";
  return 0;
}

struct BenchmarkOptions {
  std::string config_path;
  int workers = 0;
  double budget_seconds = 0;  // >0 overrides the config
  bool no_split = false;      // true overrides the config
  std::string out_dir;        // nonempty overrides the config
};

inline int cmd_benchmark(const BenchmarkOptions& o, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  BenchmarkConfig cfg = parse_benchmark_config(o.config_path);
  if (o.no_split) cfg.no_split = true;
  if (o.budget_seconds > 0) cfg.budget_seconds = o.budget_seconds;
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (cfg.out_dir.empty()) throw UsageError("no output directory (config key 'out' or --out)");

  const BinaryDataset data = load_binary_csv(cfg.data_path, cfg.label_column, cfg.positive_label);
  const int workers = resolve_workers(o.workers);
  fs::create_directories(cfg.out_dir);

  // runs.csv grows as runs finish so an interrupted protocol still leaves
  // its completed rows behind; the summary files appear only at the end.
  const fs::path runs_path = fs::path(cfg.out_dir) / "runs.csv";
  std::ofstream runs(runs_path);
  if (!runs) throw DataError("cannot write file: " + runs_path.string());
  runs << benchmark_runs_csv_header();
  runs.flush();

  const BenchmarkReport rep =
      run_benchmark(data, cfg, workers, &err, [&runs](const BenchmarkRun& run) {
        runs << benchmark_runs_csv_row(run);
        runs.flush();
      });
  runs.close();

  atomic_write_text((fs::path(cfg.out_dir) / "summary.csv").string(),
                    benchmark_summary_csv(rep));
  const std::string text = benchmark_summary_text(rep);
  atomic_write_text((fs::path(cfg.out_dir) / "summary.txt").string(), text);
  out << text;
  return 0;
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

namespace detail {

inline void add_hp_flags(CLI::App* cmd, EmitLpOptions& o) {
  cmd->add_option("--data", o.data_path, "binary CSV with a label column")->required();
  cmd->add_option("--label", o.label_column, "label column name (default: label)");
  cmd->add_option("--positive", o.positive_label, "label value to treat as class 1");
  cmd->add_option("--depth", o.depth, "tree depth D (levels of branch nodes)")->required();
  cmd->add_option("--fmax", o.max_rule_features,
                  "most features one rule may use (default: all features)");
  cmd->add_option("--smin", o.min_leaf_support,
                  "fewest instances a populated leaf may hold (default: 1)");
  cmd->add_option("--alpha", o.alpha, "per-rule-feature complexity weight, e.g. 1/100 or 0.01");
  cmd->add_option("--cost-fp", o.cost_fp, "cost of a false positive (cost objective)");
  cmd->add_option("--cost-fn", o.cost_fn, "cost of a false negative (cost objective)");
  cmd->add_option("--objective", o.objective, "accuracy | cost | balanced | f1");
}

}  // namespace detail

/// The whole command-line surface. Returns the process exit code:
/// 0 success, 1 usage error, 2 data/format error, 3 infeasible,
/// 4 budget exhausted with a usable incumbent.
inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"exact optimal classification trees with Boolean-rule splits"};
  app.require_subcommand(1);

  BinarizeOptions bin;
  CLI::App* c_bin = app.add_subcommand("binarize", "turn a raw CSV into binary features");
  c_bin->add_option("--data", bin.data_path, "raw CSV with a label column")->required();
  c_bin->add_option("--label", bin.label_column, "label column name (default: label)");
  c_bin->add_option("--positive", bin.positive_label, "label value to treat as class 1");
  c_bin->add_option("--out", bin.out_path, "binarized CSV to write")->required();
  c_bin->add_option("--map", bin.map_path, "where to save the binarization map");

  TrainOptions tr;
  bool tr_has_budget = false;
  CLI::App* c_tr = app.add_subcommand("train", "fit an optimal tree on binary data");
  c_tr->add_option("--data", tr.data_path, "binary CSV with a label column")->required();
  c_tr->add_option("--label", tr.label_column, "label column name (default: label)");
  c_tr->add_option("--positive", tr.positive_label, "label value to treat as class 1");
  c_tr->add_option("--depth", tr.depth, "tree depth D")->required();
  c_tr->add_option("--fmax", tr.max_rule_features,
                   "most features one rule may use (default: all features)");
  c_tr->add_option("--smin", tr.min_leaf_support, "minimum populated-leaf support (default: 1)");
  c_tr->add_option("--alpha", tr.alpha, "complexity weight, e.g. 1/100 or 0.01");
  c_tr->add_option("--cost-fp", tr.cost_fp, "cost of a false positive");
  c_tr->add_option("--cost-fn", tr.cost_fn, "cost of a false negative");
  c_tr->add_option("--objective", tr.objective, "accuracy | cost | balanced | f1");
  c_tr->add_option("--budget", tr.budget_seconds, "wall-clock budget in seconds");
  c_tr->callback([&] { tr_has_budget = c_tr->count("--budget") > 0; });
  c_tr->add_option("--workers", tr.workers, "parallel workers (default: BOOLTREE_WORKERS or 1)");
  c_tr->add_option("--model", tr.model_path, "where to save the tree")->required();
  c_tr->add_option("--report", tr.report_path, "where to write the run record (default: stdout)");
  c_tr->add_option("--emit-lp", tr.lp_path, "also write the model in LP format here");

  PredictOptions pr;
  CLI::App* c_pr = app.add_subcommand("predict", "label rows with a saved tree");
  c_pr->add_option("--model", pr.model_path, "saved tree")->required();
  c_pr->add_option("--data", pr.data_path, "binary CSV (a label column is ignored)")->required();
  c_pr->add_option("--label", pr.label_column, "label column to drop if present");
  c_pr->add_option("--out", pr.out_path, "where to write predictions (default: stdout)");

  EvaluateOptions ev;
  CLI::App* c_ev = app.add_subcommand("evaluate", "score a saved tree on labeled data");
  c_ev->add_option("--model", ev.model_path, "saved tree")->required();
  c_ev->add_option("--data", ev.data_path, "binary CSV with a label column")->required();
  c_ev->add_option("--label", ev.label_column, "label column name (default: label)");
  c_ev->add_option("--positive", ev.positive_label, "label value to treat as class 1");
  c_ev->add_option("--cost-fp", ev.cost_fp, "cost of a false positive");
  c_ev->add_option("--cost-fn", ev.cost_fn, "cost of a false negative");

  BenchmarkOptions bm;
  CLI::App* c_bm = app.add_subcommand("benchmark", "split/grid-search/select/report protocol");
  c_bm->add_option("--config", bm.config_path, "benchmark config file")->required();
  c_bm->add_option("--workers", bm.workers, "parallel workers (default: BOOLTREE_WORKERS or 1)");
  c_bm->add_option("--budget", bm.budget_seconds, "per-solve budget override in seconds");
  c_bm->add_flag("--no-split", bm.no_split, "use the whole set for train/validation/test");
  c_bm->add_option("--out", bm.out_dir, "output directory override");

  EmitLpOptions lp;
  CLI::App* c_lp = app.add_subcommand("emit-lp", "write the exact model in LP format");
  detail::add_hp_flags(c_lp, lp);
  c_lp->add_option("--out", lp.out_path, "LP file to write")->required();

  SolveExternalOptions sx;
  CLI::App* c_sx =
      app.add_subcommand("solve-external", "check an external solver's solution, extract a tree");
  detail::add_hp_flags(c_sx, sx.model);
  c_sx->add_option("--solution", sx.solution_path, "solution file (variable value lines)")
      ->required();
  c_sx->add_option("--lp", sx.lp_path, "LP file to cross-check against the rebuilt model");
  c_sx->add_option("--model", sx.model_out, "where to save the extracted tree")->required();
  c_sx->add_option("--report", sx.report_path, "where to write the run record (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  tr.budget_given = tr_has_budget;

  try {
    if (c_bin->parsed()) return cmd_binarize(bin, out, err);
    if (c_tr->parsed()) return cmd_train(tr, out, err);
    if (c_pr->parsed()) return cmd_predict(pr, out, err);
    if (c_ev->parsed()) return cmd_evaluate(ev, out, err);
    if (c_bm->parsed()) return cmd_benchmark(bm, out, err);
    if (c_lp->parsed()) return cmd_emit_lp(lp, out, err);
    if (c_sx->parsed()) return cmd_solve_external(sx, out, err);
    err << "error: no subcommand\n";
    return 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

inline int cli_main(int argc, const char* const* argv) {
  return cli_main(argc, argv, std::cout, std::cerr);
}

}  // namespace booltree
