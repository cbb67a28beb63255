#pragma once

// Exact optimizer for Boolean-rule classification trees.
//
// The search space is the set of trees accepted by the integer model in
// mip.hpp: every branch node may test "count of true features in S at most
// b", sides with fewer than the minimum leaf support are rejected, and the
// tree without any split is admissible only when the minimum support is zero
// (it keeps an empty sibling leaf switched on).
//
// Strategy: candidate splits are enumerated per data region with duplicate
// partitions removed; subtrees of remaining depth at most two are solved by
// memoized dynamic programming keyed on (depth, region); deeper levels run a
// depth-first search with incumbent pruning and iterative broadening. The
// additive objectives (accuracy, cost, balanced accuracy) compare exactly in
// a scaled 128-bit integer cost space; the F1 objective is a ratio of error
// totals, so regions carry a Pareto frontier of (false negatives, false
// positives, rule features) instead of a scalar.
//
// Results are deterministic for any worker count: workers partition the root
// candidate list, every partial result carries a total tie-break key
// (objective, rule-feature count, candidate position), and the reduction
// over workers compares keys, never arrival order.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "booltree/core.hpp"
#include "booltree/dataset.hpp"
#include "booltree/metrics.hpp"
#include "booltree/tree.hpp"

namespace booltree {

enum class SolveStatus { Optimal, FeasibleTimeLimit };

inline std::string solve_status_name(SolveStatus s) {
  return s == SolveStatus::Optimal ? "optimal" : "feasible-time-limit";
}

struct SolveTallies {
  long long errors = 0;
  long long false_negatives = -1;  // -1 when the problem is not two-class
  long long false_positives = -1;
};

struct TracePoint {
  double seconds = 0;
  Rational objective;
};

struct SolveOptions {
  double budget_seconds = 0;  // <= 0 means no limit
  int workers = 1;
  int broaden_base = 8;  // candidate cap of the first deep-search pass
  // Byte ceiling for the per-solve region cache, shared across workers;
  // 0 means unlimited. The cache only affects speed: once full it stops
  // absorbing new entries and the search recomputes, so results are
  // identical either way while peak memory stays bounded.
  std::size_t memo_budget_bytes = std::size_t(1) << 30;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Optimal;
  BooleanTree tree;
  Rational objective;  // in the objective's native direction
  Rational gap;        // 0 when optimal, distance to the trivial bound otherwise
  double seconds = 0;
  unsigned long long regions_explored = 0;
  SolveTallies tallies;
  std::vector<TracePoint> trace;  // incumbent improvements over time
};

struct SplitCandidate {
  std::vector<int> features;  // ascending
  int threshold = 0;          // goes left while the true-feature count stays at or below it
  std::vector<std::uint64_t> left_mask;  // dataset row bits routed left
  long long left_count = 0;
};

// All splits of `region` that produce two sides of at least `min_side`
// instances, one candidate per distinct partition. Features constant on the
// region are skipped (they cannot change any partition), and among rules
// inducing the same partition the first in (size, features, threshold) order
// is kept. The returned order is that same canonical order.
inline std::vector<SplitCandidate> enumerate_candidates(const BinaryDataset& data,
                                                        const std::vector<std::uint32_t>& region,
                                                        int max_rule_features,
                                                        long long min_side) {
  std::vector<SplitCandidate> out;
  if (region.empty()) return out;
  min_side = std::max<long long>(1, min_side);
  if (2 * min_side > static_cast<long long>(region.size())) return out;

  std::vector<int> varying;
  for (std::size_t f = 0; f < data.n_features; ++f) {
    const std::uint8_t first = data.at(region[0], f);
    for (std::uint32_t i : region)
      if (data.at(i, f) != first) {
        varying.push_back(static_cast<int>(f));
        break;
      }
  }
  const int max_size = std::min<int>(max_rule_features, static_cast<int>(varying.size()));
  const std::size_t words = (data.n + 63) / 64;
  std::unordered_set<std::string> seen_partitions;
  std::vector<std::uint8_t> cnt(region.size());

  for (int s = 1; s <= max_size; ++s) {
    std::vector<int> comb(s);
    for (int j = 0; j < s; ++j) comb[j] = j;
    while (true) {
      for (std::size_t r = 0; r < region.size(); ++r) {
        int c = 0;
        for (int j = 0; j < s; ++j) c += data.at(region[r], varying[comb[j]]);
        cnt[r] = static_cast<std::uint8_t>(c);
      }
      for (int b = 0; b < s; ++b) {
        long long left = 0;
        for (std::size_t r = 0; r < region.size(); ++r) left += cnt[r] <= b;
        if (left < min_side || static_cast<long long>(region.size()) - left < min_side) continue;
        std::vector<std::uint64_t> mask(words, 0);
        for (std::size_t r = 0; r < region.size(); ++r)
          if (cnt[r] <= b) mask[region[r] >> 6] |= std::uint64_t(1) << (region[r] & 63);
        std::string key(reinterpret_cast<const char*>(mask.data()), words * sizeof(std::uint64_t));
        if (!seen_partitions.insert(std::move(key)).second) continue;
        SplitCandidate cand;
        cand.features.reserve(s);
        for (int j = 0; j < s; ++j) cand.features.push_back(varying[comb[j]]);
        cand.threshold = b;
        cand.left_mask = std::move(mask);
        cand.left_count = left;
        out.push_back(std::move(cand));
      }
      int i = s - 1;
      while (i >= 0 && comb[i] == static_cast<int>(varying.size()) - s + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int j = i + 1; j < s; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  return out;
}

namespace detail {

inline __int128 gcd128(__int128 a, __int128 b) {
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

struct BudgetExpired {};

// Exact additive cost arithmetic: every per-instance and per-feature penalty
// is an integer once multiplied by a common denominator of all the rational
// coefficients, so 128-bit integer comparison decides optimality exactly.
struct CostModel {
  ObjectiveKind objective = ObjectiveKind::Accuracy;
  HyperParams hp;
  int n_classes = 2;
  long long n = 0, n_pos = 0, n_neg = 0;
  bool maximize = false;
  bool fractional = false;             // F1: ratio objective, frontier search
  __int128 scale = 1;                  // common denominator
  __int128 alpha_unit = 0;             // scaled penalty per rule feature
  std::vector<__int128> miss_unit;     // scaled penalty per misclassified instance, by true class

  static CostModel make(const BinaryDataset& data, const HyperParams& hp, ObjectiveKind obj) {
    CostModel m;
    m.objective = obj;
    m.hp = hp;
    m.n_classes = data.n_classes;
    m.n = static_cast<long long>(data.n);
    m.n_pos = data.n_classes == 2 ? data.positives() : 0;
    m.n_neg = data.n_classes == 2 ? data.negatives() : 0;
    m.maximize = obj == ObjectiveKind::BalancedAccuracy || obj == ObjectiveKind::F1;
    m.fractional = obj == ObjectiveKind::F1;

    const __int128 limit = static_cast<__int128>(1000000000000000000LL) *
                           static_cast<__int128>(1000000000000LL);  // 1e30
    auto lcm = [&](__int128 a, __int128 b) {
      const __int128 g = gcd128(a, b);
      const __int128 l = a / g * b;
      if (l > limit)
        throw UsageError("hyperparameter denominators are too large for exact search arithmetic");
      return l;
    };

    m.miss_unit.assign(std::max(2, m.n_classes), 0);
    switch (obj) {
      case ObjectiveKind::Accuracy: {
        m.scale = lcm(m.n, hp.alpha.denominator());
        for (auto& u : m.miss_unit) u = m.scale / m.n;
        break;
      }
      case ObjectiveKind::CostSensitive: {
        m.scale = lcm(lcm(m.n * static_cast<__int128>(hp.cost_fp.denominator()),
                          m.n * static_cast<__int128>(hp.cost_fn.denominator())),
                      hp.alpha.denominator());
        m.miss_unit[0] = m.scale / (m.n * static_cast<__int128>(hp.cost_fp.denominator())) *
                         hp.cost_fp.numerator();
        m.miss_unit[1] = m.scale / (m.n * static_cast<__int128>(hp.cost_fn.denominator())) *
                         hp.cost_fn.numerator();
        break;
      }
      case ObjectiveKind::BalancedAccuracy: {
        m.scale = lcm(lcm(2 * m.n_pos, 2 * m.n_neg), hp.alpha.denominator());
        m.miss_unit[0] = m.scale / (2 * m.n_neg);
        m.miss_unit[1] = m.scale / (2 * m.n_pos);
        break;
      }
      case ObjectiveKind::F1: {
        m.scale = 1;
        m.miss_unit[0] = m.miss_unit[1] = 1;  // greedy seeding only
        break;
      }
    }
    if (!m.fractional)
      m.alpha_unit = m.scale / hp.alpha.denominator() * hp.alpha.numerator();
    return m;
  }

  // Best single-leaf cost of a region and the class label achieving it
  // (smallest label on ties).
  std::pair<__int128, int> leaf_eval(const std::vector<long long>& counts) const {
    __int128 total = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) total += miss_unit[k] * counts[k];
    __int128 best = 0;
    int label = 0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const __int128 c = total - miss_unit[k] * counts[k];
      if (k == 0 || c < best) {
        best = c;
        label = static_cast<int>(k);
      }
    }
    return {best, label};
  }

  Rational objective_value(long long errors, long long fn, long long fp, long long feat) const {
    const Rational complexity = hp.alpha * Rational(feat);
    switch (objective) {
      case ObjectiveKind::Accuracy:
        return Rational(errors, n) + complexity;
      case ObjectiveKind::CostSensitive:
        return (hp.cost_fp * Rational(fp) + hp.cost_fn * Rational(fn)) / Rational(n) + complexity;
      case ObjectiveKind::BalancedAccuracy:
        return Rational(1) - Rational(fn, 2 * n_pos) - Rational(fp, 2 * n_neg) - complexity;
      case ObjectiveKind::F1:
        return Rational(2 * (n_pos - fn), 2 * n_pos - fn + fp) - complexity;
    }
    throw UsageError("unknown objective");
  }
};

struct Plan {
  enum class Kind { Leaf, Split, Deferred } kind = Kind::Leaf;
  // Leaf
  int label = -1;
  std::vector<long long> counts;
  // Split
  std::vector<int> features;
  int threshold = 0;
  std::unique_ptr<Plan> left, right;
  // Deferred: a subtree solved by the region table, expanded on demand
  std::vector<std::uint32_t> region;
  int dr = 0;

  std::unique_ptr<Plan> clone() const {
    auto p = std::make_unique<Plan>();
    p->kind = kind;
    p->label = label;
    p->counts = counts;
    p->features = features;
    p->threshold = threshold;
    p->region = region;
    p->dr = dr;
    if (left) p->left = left->clone();
    if (right) p->right = right->clone();
    return p;
  }
};

struct F1Entry {
  long long fn = 0, fp = 0, feat = 0;
  friend bool operator==(const F1Entry& a, const F1Entry& b) {
    return a.fn == b.fn && a.fp == b.fp && a.feat == b.feat;
  }
  friend bool operator<(const F1Entry& a, const F1Entry& b) {
    if (a.fn != b.fn) return a.fn < b.fn;
    if (a.fp != b.fp) return a.fp < b.fp;
    return a.feat < b.feat;
  }
};

class SolverCore {
 public:
  SolverCore(const BinaryDataset& data, const HyperParams& hp, ObjectiveKind obj,
             const SolveOptions& opt)
      : data_(data),
        hp_(hp),
        obj_(obj),
        opt_(opt),
        model_(CostModel::make(data, hp, obj)),
        words_((data.n + 63) / 64),
        min_side_(std::max<long long>(1, hp.min_leaf_support)) {}

  SolveResult run() {
    start_ = Clock::now();
    deadline_ = opt_.budget_seconds > 0
                    ? start_ + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(opt_.budget_seconds))
                    : Clock::time_point::max();

    std::vector<std::uint32_t> full(data_.n);
    for (std::size_t i = 0; i < data_.n; ++i) full[i] = static_cast<std::uint32_t>(i);

    const int workers = std::clamp(opt_.workers, 1, 64);
    workers_.resize(workers);
    memo_cap_ = opt_.memo_budget_bytes == 0
                    ? 0
                    : std::max<std::size_t>(opt_.memo_budget_bytes / workers, std::size_t(1) << 12);

    // Seed the incumbent with a greedy tree so a result exists at any budget.
    // Greedy construction also proves feasibility or raises the failure.
    {
      std::unique_ptr<Plan> seed = greedy_plan(full, hp_.depth, /*is_root=*/true);
      Outcome out = materialize(workers_[0], *seed);
      registry_consider(std::move(out), std::numeric_limits<long long>::max());
    }

    root_cands_ = enumerate_candidates(data_, full, hp_.max_rule_features, min_side_);

    bool timed_out = Clock::now() >= deadline_;
    if (!timed_out) {
      try {
        if (model_.fractional)
          f1_root_pass(full);
        else
          additive_root_passes(full);
      } catch (const BudgetExpired&) {
        timed_out = true;
      }
      if (stop_) timed_out = true;
    }

    SolveResult result;
    {
      std::lock_guard<std::mutex> lock(mu_);
      result.tree = best_.outcome.tree;
      result.objective = best_.outcome.objective;
      result.tallies = best_.outcome.tallies;
      result.trace = trace_;
    }
    result.status = timed_out ? SolveStatus::FeasibleTimeLimit : SolveStatus::Optimal;
    if (result.status == SolveStatus::Optimal) {
      result.gap = Rational(0);
    } else if (model_.maximize) {
      result.gap = Rational(1) - result.objective;  // 1 is the best either score can reach
    } else {
      result.gap = result.objective;  // 0 is the best any cost can reach
    }
    result.seconds = seconds_since_start();
    for (const Worker& w : workers_) result.regions_explored += w.ops;
    return result;
  }

 private:
  using Clock = std::chrono::steady_clock;

  struct DpEntry {
    bool feasible = false;
    __int128 cost = 0;
    long long feat = 0;
  };

  struct Worker {
    std::unordered_map<std::string, DpEntry> memo;
    std::unordered_map<std::string, std::vector<F1Entry>> fmemo;
    std::size_t memo_bytes = 0;
    unsigned long long ops = 0;
    unsigned long long next_clock_check = 4096;
  };

  // Approximate heap charge of one cache node beyond its key and payload.
  static constexpr std::size_t kMemoNodeOverhead = 64;

  // Charge `bytes` against this worker's cache share; false means the cache
  // is full and the entry should simply not be stored.
  bool memo_admit(Worker& w, std::size_t bytes) {
    if (memo_cap_ != 0 && w.memo_bytes + bytes > memo_cap_) return false;
    w.memo_bytes += bytes;
    return true;
  }

  struct Sub {
    __int128 cost = 0;
    long long feat = 0;
    std::unique_ptr<Plan> plan;
  };

  // A fully materialized solution.
  struct Outcome {
    BooleanTree tree;
    Rational objective;
    SolveTallies tallies;
    long long feat = 0;
    __int128 cost = 0;  // additive objectives only
  };

  struct Best {
    bool has = false;
    long long order = std::numeric_limits<long long>::max();  // candidate position tie-break
    Outcome outcome;
  };

  double seconds_since_start() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  void budget(Worker& w, unsigned long long cost = 1) {
    w.ops += cost;
    if (w.ops >= w.next_clock_check) {
      w.next_clock_check = w.ops + 4096;
      if (stop_ || Clock::now() >= deadline_) {
        stop_ = true;
        throw BudgetExpired{};
      }
    }
  }

  std::vector<long long> tally(const std::vector<std::uint32_t>& region) const {
    std::vector<long long> counts(std::max(2, data_.n_classes), 0);
    for (std::uint32_t i : region) ++counts[data_.y[i]];
    return counts;
  }

  std::string region_key(const std::vector<std::uint32_t>& region, int dr) const {
    std::vector<std::uint64_t> mask(words_, 0);
    for (std::uint32_t i : region) mask[i >> 6] |= std::uint64_t(1) << (i & 63);
    std::string key(reinterpret_cast<const char*>(mask.data()), words_ * sizeof(std::uint64_t));
    key.push_back(static_cast<char>('0' + dr));
    return key;
  }

  static void split_region(const std::vector<std::uint32_t>& region, const SplitCandidate& cand,
                           std::vector<std::uint32_t>& left, std::vector<std::uint32_t>& right) {
    left.clear();
    right.clear();
    for (std::uint32_t i : region) {
      if ((cand.left_mask[i >> 6] >> (i & 63)) & 1)
        left.push_back(i);
      else
        right.push_back(i);
    }
  }

  // ---- Exact table for subtrees of remaining depth <= 2 --------------------

  DpEntry dp(Worker& w, const std::vector<std::uint32_t>& region, int dr) {
    budget(w);
    // A depth-0 evaluation costs the same as a cache probe, and the distinct
    // depth-0 regions outnumber everything else combined: caching them floods
    // the table without saving work.
    if (dr == 0) return dp_compute(w, region, 0);
    const std::string key = region_key(region, dr);
    if (auto it = w.memo.find(key); it != w.memo.end()) return it->second;
    const DpEntry entry = dp_compute(w, region, dr);
    if (memo_admit(w, key.size() + sizeof(DpEntry) + kMemoNodeOverhead)) w.memo.emplace(key, entry);
    return entry;
  }

  DpEntry dp_compute(Worker& w, const std::vector<std::uint32_t>& region, int dr) {
    DpEntry best;
    if (static_cast<long long>(region.size()) < hp_.min_leaf_support) return best;  // infeasible
    const auto counts = tally(region);
    const auto [leaf_cost, leaf_label] = model_.leaf_eval(counts);
    (void)leaf_label;
    best = {true, leaf_cost, 0};
    if (dr == 0 || leaf_cost == 0) return best;  // nothing can cost less than 0

    auto cands = enumerate_candidates(data_, region, hp_.max_rule_features, min_side_);
    budget(w, cands.size() + region.size());
    std::vector<std::uint32_t> left, right;
    for (const SplitCandidate& cand : cands) {
      budget(w, region.size());
      split_region(region, cand, left, right);
      const DpEntry le = dp(w, left, dr - 1);
      if (!le.feasible) continue;
      const DpEntry re = dp(w, right, dr - 1);
      if (!re.feasible) continue;
      const __int128 cost =
          le.cost + re.cost + model_.alpha_unit * static_cast<long long>(cand.features.size());
      const long long feat = le.feat + re.feat + static_cast<long long>(cand.features.size());
      if (!best.feasible || cost < best.cost || (cost == best.cost && feat < best.feat))
        best = {true, cost, feat};
    }
    return best;
  }

  // Rebuild the table's optimal subtree by scanning options in canonical
  // order: the leaf first, then candidates as enumerated. The first option
  // matching the stored optimum is the canonical choice.
  std::unique_ptr<Plan> dp_replay(Worker& w, const std::vector<std::uint32_t>& region, int dr) {
    const DpEntry entry = dp(w, region, dr);
    const auto counts = tally(region);
    const auto [leaf_cost, leaf_label] = model_.leaf_eval(counts);
    if (static_cast<long long>(region.size()) >= hp_.min_leaf_support && entry.feat == 0 &&
        entry.cost == leaf_cost) {
      auto p = std::make_unique<Plan>();
      p->kind = Plan::Kind::Leaf;
      p->label = leaf_label;
      p->counts = counts;
      return p;
    }
    auto cands = enumerate_candidates(data_, region, hp_.max_rule_features, min_side_);
    std::vector<std::uint32_t> left, right;
    for (const SplitCandidate& cand : cands) {
      split_region(region, cand, left, right);
      const DpEntry le = dp(w, left, dr - 1);
      if (!le.feasible) continue;
      const DpEntry re = dp(w, right, dr - 1);
      if (!re.feasible) continue;
      const __int128 cost =
          le.cost + re.cost + model_.alpha_unit * static_cast<long long>(cand.features.size());
      const long long feat = le.feat + re.feat + static_cast<long long>(cand.features.size());
      if (cost != entry.cost || feat != entry.feat) continue;
      auto p = std::make_unique<Plan>();
      p->kind = Plan::Kind::Split;
      p->features = cand.features;
      p->threshold = cand.threshold;
      p->left = dp_replay(w, left, dr - 1);
      p->right = dp_replay(w, right, dr - 1);
      return p;
    }
    throw std::logic_error("region table replay found no matching option");
  }

  // ---- Depth-first search for subtrees of remaining depth >= 3 -------------

  __int128 incumbent_cost() {
    std::lock_guard<std::mutex> lock(mu_);
    return best_.has && !model_.fractional ? best_.outcome.cost
                                           : std::numeric_limits<__int128>::max() / 4;
  }

  std::optional<Sub> child_solve(Worker& w, const std::vector<std::uint32_t>& region, int dr,
                                 __int128 ub, long long cap) {
    if (dr <= 2) {
      const DpEntry e = dp(w, region, dr);
      if (!e.feasible || e.cost > ub) return std::nullopt;
      Sub sub;
      sub.cost = e.cost;
      sub.feat = e.feat;
      sub.plan = std::make_unique<Plan>();
      sub.plan->kind = Plan::Kind::Deferred;
      sub.plan->region = region;
      sub.plan->dr = dr;
      return sub;
    }
    return search(w, region, dr, ub, cap);
  }

  // Best subtree for `region` with `dr` levels remaining, with cost at most
  // `ub`; nullopt when infeasible or when every option exceeds the bound.
  // `cap` limits how many candidates are explored per node; passes with a cap
  // mark `truncated_` so the final, uncapped pass is known to be exact.
  std::optional<Sub> search(Worker& w, const std::vector<std::uint32_t>& region, int dr,
                            __int128 ub, long long cap) {
    budget(w);
    if (static_cast<long long>(region.size()) < hp_.min_leaf_support) return std::nullopt;
    const auto counts = tally(region);
    const auto [leaf_cost, leaf_label] = model_.leaf_eval(counts);

    std::optional<Sub> best;
    if (static_cast<long long>(region.size()) >= hp_.min_leaf_support && leaf_cost <= ub) {
      Sub sub;
      sub.cost = leaf_cost;
      sub.feat = 0;
      sub.plan = std::make_unique<Plan>();
      sub.plan->kind = Plan::Kind::Leaf;
      sub.plan->label = leaf_label;
      sub.plan->counts = counts;
      best = std::move(sub);
      if (leaf_cost == 0) return best;
    }

    auto cands = enumerate_candidates(data_, region, hp_.max_rule_features, min_side_);
    budget(w, cands.size() + region.size());

    std::vector<std::size_t> order(cands.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (cap < static_cast<long long>(cands.size())) {
      truncated_ = true;
      order = lookahead_order(w, region, cands);
      order.resize(static_cast<std::size_t>(cap));
    }

    std::vector<std::uint32_t> left, right;
    for (std::size_t idx : order) {
      const SplitCandidate& cand = cands[idx];
      __int128 bound = std::min(ub, incumbent_cost());
      if (best) bound = std::min(bound, best->cost);
      const __int128 alpha_cost =
          model_.alpha_unit * static_cast<long long>(cand.features.size());
      if (alpha_cost > bound) continue;
      split_region(region, cand, left, right);
      auto lsub = child_solve(w, left, dr - 1, bound - alpha_cost, cap);
      if (!lsub) continue;
      auto rsub = child_solve(w, right, dr - 1, bound - alpha_cost - lsub->cost, cap);
      if (!rsub) continue;
      Sub sub;
      sub.cost = alpha_cost + lsub->cost + rsub->cost;
      sub.feat = static_cast<long long>(cand.features.size()) + lsub->feat + rsub->feat;
      sub.plan = std::make_unique<Plan>();
      sub.plan->kind = Plan::Kind::Split;
      sub.plan->features = cand.features;
      sub.plan->threshold = cand.threshold;
      sub.plan->left = std::move(lsub->plan);
      sub.plan->right = std::move(rsub->plan);
      if (!best || sub.cost < best->cost || (sub.cost == best->cost && sub.feat < best->feat))
        best = std::move(sub);
    }
    return best;
  }

  // Candidate positions ordered by the cost of stopping right after the
  // split (ties keep candidate order); used to pick the capped passes' most
  // promising candidates first.
  std::vector<std::size_t> lookahead_order(Worker& w, const std::vector<std::uint32_t>& region,
                                           const std::vector<SplitCandidate>& cands) {
    std::vector<std::pair<__int128, std::size_t>> scored(cands.size());
    std::vector<std::uint32_t> left, right;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      budget(w, region.size());
      split_region(region, cands[i], left, right);
      const __int128 score =
          model_.leaf_eval(tally(left)).first + model_.leaf_eval(tally(right)).first +
          model_.alpha_unit * static_cast<long long>(cands[i].features.size());
      scored[i] = {score, i};
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::size_t> order(cands.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = scored[i].second;
    return order;
  }

  // ---- Root orchestration (additive objectives) ----------------------------

  void additive_root_passes(const std::vector<std::uint32_t>& full) {
    long long cap = hp_.depth >= 3 ? std::max(1, opt_.broaden_base)
                                   : std::numeric_limits<long long>::max() / 2;
    while (true) {
      truncated_ = false;
      const bool complete = additive_root_pass(full, cap);
      if (!complete) return;  // budget expired inside the pass
      if (!truncated_) break;
      cap *= 4;
    }
  }

  // One pass over the root candidates with the given per-node cap. Returns
  // false when the budget expired. On an untruncated (exact) pass the
  // canonical reduction of all per-candidate results replaces the incumbent.
  bool additive_root_pass(const std::vector<std::uint32_t>& full, long long cap) {
    // The no-split option: admissible only with zero minimum support, since
    // it keeps an empty sibling leaf switched on.
    std::vector<Best> results(workers_.size() + 1);
    if (hp_.min_leaf_support == 0) {
      const auto counts = tally(full);
      Plan plan;
      plan.kind = Plan::Kind::Leaf;
      plan.label = model_.leaf_eval(counts).second;
      plan.counts = counts;
      Best& slot = results[workers_.size()];
      slot.has = true;
      slot.order = -1;
      slot.outcome = materialize(workers_[0], plan);
      registry_consider_copy(slot.outcome, slot.order);
    }

    std::vector<std::size_t> selected(root_cands_.size());
    for (std::size_t i = 0; i < selected.size(); ++i) selected[i] = i;
    if (cap < static_cast<long long>(root_cands_.size())) {
      truncated_ = true;
      selected = lookahead_order(workers_[0], full, root_cands_);
      selected.resize(static_cast<std::size_t>(cap));
    }

    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&](std::size_t wid) {
      Worker& w = workers_[wid];
      try {
        std::vector<std::uint32_t> left, right;
        for (std::size_t pos = wid; pos < selected.size(); pos += workers_.size()) {
          if (stop_) break;
          const std::size_t idx = selected[pos];
          const SplitCandidate& cand = root_cands_[idx];
          const __int128 bound = incumbent_cost();
          const __int128 alpha_cost =
              model_.alpha_unit * static_cast<long long>(cand.features.size());
          if (alpha_cost > bound) continue;
          split_region(full, cand, left, right);
          auto lsub = child_solve(w, left, hp_.depth - 1, bound - alpha_cost, cap);
          if (!lsub) continue;
          auto rsub = child_solve(w, right, hp_.depth - 1, bound - alpha_cost - lsub->cost, cap);
          if (!rsub) continue;
          Plan plan;
          plan.kind = Plan::Kind::Split;
          plan.features = cand.features;
          plan.threshold = cand.threshold;
          plan.left = std::move(lsub->plan);
          plan.right = std::move(rsub->plan);
          Outcome out = materialize(w, plan);
          Best& mine = results[wid];
          const long long order = static_cast<long long>(idx);
          if (!mine.has || better_additive(out, order, mine)) {
            registry_consider_copy(out, order);
            mine.has = true;
            mine.order = order;
            mine.outcome = std::move(out);
          }
        }
      } catch (const BudgetExpired&) {
        stop_ = true;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        stop_ = true;
      }
    };

    if (workers_.size() == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(workers_.size());
      for (std::size_t wid = 0; wid < workers_.size(); ++wid) threads.emplace_back(work, wid);
      for (auto& t : threads) t.join();
    }
    if (error) std::rethrow_exception(error);
    if (stop_) return false;

    if (!truncated_) {
      // Canonical reduction: among exact per-candidate results, the smallest
      // (cost, rule features, candidate position) wins.
      Best winner;
      for (Best& r : results)
        if (r.has && (!winner.has || better_additive(r.outcome, r.order, winner))) winner = r;
      if (!winner.has)
        throw InfeasibleError("no tree satisfies the minimum leaf support");
      std::lock_guard<std::mutex> lock(mu_);
      best_ = std::move(winner);
    }
    return true;
  }

  bool better_additive(const Outcome& out, long long order, const Best& than) const {
    if (out.cost != than.outcome.cost) return out.cost < than.outcome.cost;
    if (out.feat != than.outcome.feat) return out.feat < than.outcome.feat;
    return order < than.order;
  }

  // ---- F1: Pareto frontiers of (false negatives, false positives, features)

  // Returned by value: callers hold frame-local copies, so a full cache can
  // decline to store an entry without invalidating anything downstream.
  std::vector<F1Entry> f1_frontier(Worker& w, const std::vector<std::uint32_t>& region, int dr) {
    budget(w);
    if (dr == 0) return f1_compute(w, region, 0);  // as cheap as a cache probe
    const std::string key = region_key(region, dr);
    if (auto it = w.fmemo.find(key); it != w.fmemo.end()) return it->second;
    std::vector<F1Entry> entries = f1_compute(w, region, dr);
    if (memo_admit(w, key.size() + entries.size() * sizeof(F1Entry) + kMemoNodeOverhead))
      w.fmemo.emplace(key, entries);
    return entries;
  }

  std::vector<F1Entry> f1_compute(Worker& w, const std::vector<std::uint32_t>& region, int dr) {
    std::vector<F1Entry> entries;
    if (static_cast<long long>(region.size()) < hp_.min_leaf_support) return entries;
    const auto counts = tally(region);
    const long long pos = counts[1], neg = counts[0];
    if (pos == 0 || neg == 0) {
      entries.push_back({0, 0, 0});  // the pure label; nothing can dominate it
      return entries;
    }
    entries.push_back({pos, 0, 0});  // label 0
    entries.push_back({0, neg, 0});  // label 1
    if (dr == 0) return pareto_prune(std::move(entries));  // prune sorts; replay bisects

    auto cands = enumerate_candidates(data_, region, hp_.max_rule_features, min_side_);
    budget(w, cands.size() + region.size());
    std::vector<std::uint32_t> left, right;
    for (const SplitCandidate& cand : cands) {
      budget(w, region.size());
      split_region(region, cand, left, right);
      const auto& le = f1_frontier(w, left, dr - 1);
      if (le.empty()) continue;
      const auto& re = f1_frontier(w, right, dr - 1);
      if (re.empty()) continue;
      budget(w, le.size() * re.size());
      const long long s = static_cast<long long>(cand.features.size());
      for (const F1Entry& a : le)
        for (const F1Entry& b : re)
          entries.push_back({a.fn + b.fn, a.fp + b.fp, a.feat + b.feat + s});
    }
    return pareto_prune(std::move(entries));
  }

  static std::vector<F1Entry> pareto_prune(std::vector<F1Entry> entries) {
    std::sort(entries.begin(), entries.end());
    std::vector<F1Entry> kept;
    for (const F1Entry& e : entries) {
      bool dominated = false;
      for (const F1Entry& k : kept)
        if (k.fn <= e.fn && k.fp <= e.fp && k.feat <= e.feat) {
          dominated = true;  // covers exact duplicates too: sorted order puts the keeper first
          break;
        }
      if (!dominated) kept.push_back(e);
    }
    return kept;
  }

  std::unique_ptr<Plan> f1_replay(Worker& w, const std::vector<std::uint32_t>& region, int dr,
                                  const F1Entry& target) {
    const auto counts = tally(region);
    const long long pos = counts[1], neg = counts[0];
    if (static_cast<long long>(region.size()) >= hp_.min_leaf_support && target.feat == 0) {
      // Leaf options in label order; a pure region collapses both to (0,0).
      const F1Entry label0{pos, 0, 0}, label1{0, neg, 0};
      if (target == label0 || target == label1) {
        auto p = std::make_unique<Plan>();
        p->kind = Plan::Kind::Leaf;
        p->label = target == label0 ? 0 : 1;
        p->counts = counts;
        return p;
      }
    }
    auto cands = enumerate_candidates(data_, region, hp_.max_rule_features, min_side_);
    std::vector<std::uint32_t> left, right;
    for (const SplitCandidate& cand : cands) {
      const long long s = static_cast<long long>(cand.features.size());
      if (s > target.feat) continue;
      split_region(region, cand, left, right);
      const auto& le = f1_frontier(w, left, dr - 1);
      const auto& re = f1_frontier(w, right, dr - 1);
      for (const F1Entry& a : le) {
        if (a.fn > target.fn || a.fp > target.fp || a.feat + s > target.feat) continue;
        const F1Entry need{target.fn - a.fn, target.fp - a.fp, target.feat - a.feat - s};
        if (!std::binary_search(re.begin(), re.end(), need)) continue;
        auto p = std::make_unique<Plan>();
        p->kind = Plan::Kind::Split;
        p->features = cand.features;
        p->threshold = cand.threshold;
        p->left = f1_replay(w, left, dr - 1, a);
        p->right = f1_replay(w, right, dr - 1, need);
        return p;
      }
    }
    throw std::logic_error("frontier replay found no matching option");
  }

  void f1_root_pass(const std::vector<std::uint32_t>& full) {
    // Per-candidate best F1 outcomes; ties resolved by fewer rule features,
    // then the smaller (fn, fp) pair, then candidate position.
    struct F1Best {
      bool has = false;
      Rational objective;
      F1Entry entry;
      long long order = std::numeric_limits<long long>::max();
      std::size_t cand_index = 0;
      F1Entry left_part, right_part;  // how the winning entry splits at the root
      bool is_leaf = false;
      int leaf_label = 0;
    };
    auto better = [](const F1Best& a, const F1Best& b) {
      if (a.objective != b.objective) return a.objective > b.objective;
      if (a.entry.feat != b.entry.feat) return a.entry.feat < b.entry.feat;
      if (!(a.entry == b.entry)) return a.entry < b.entry;
      return a.order < b.order;
    };

    const auto counts = tally(full);
    const long long pos = counts[1], neg = counts[0];
    std::vector<F1Best> results(workers_.size() + 1);
    if (hp_.min_leaf_support == 0) {
      // No-split option: label 1 keeps recall, label 0 forfeits every positive.
      for (int label = 0; label <= 1; ++label) {
        F1Best opt;
        opt.has = true;
        opt.is_leaf = true;
        opt.leaf_label = label;
        opt.entry = label == 0 ? F1Entry{pos, 0, 0} : F1Entry{0, neg, 0};
        opt.objective = model_.objective_value(opt.entry.fn + opt.entry.fp, opt.entry.fn,
                                               opt.entry.fp, 0);
        opt.order = -1;
        F1Best& slot = results[workers_.size()];
        if (!slot.has || better(opt, slot)) slot = opt;
      }
      f1_registry_consider(workers_[0], full, results[workers_.size()]);
    }

    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&](std::size_t wid) {
      Worker& w = workers_[wid];
      try {
        std::vector<std::uint32_t> left, right;
        for (std::size_t idx = wid; idx < root_cands_.size(); idx += workers_.size()) {
          if (stop_) break;
          const SplitCandidate& cand = root_cands_[idx];
          const long long s = static_cast<long long>(cand.features.size());
          split_region(full, cand, left, right);
          const auto& le = f1_frontier(w, left, hp_.depth - 1);
          if (le.empty()) continue;
          const auto& re = f1_frontier(w, right, hp_.depth - 1);
          if (re.empty()) continue;
          budget(w, le.size() * re.size());
          for (const F1Entry& a : le)
            for (const F1Entry& b : re) {
              F1Best opt;
              opt.has = true;
              opt.entry = {a.fn + b.fn, a.fp + b.fp, a.feat + b.feat + s};
              opt.objective = model_.objective_value(opt.entry.fn + opt.entry.fp, opt.entry.fn,
                                                     opt.entry.fp, opt.entry.feat);
              opt.order = static_cast<long long>(idx);
              opt.cand_index = idx;
              opt.left_part = a;
              opt.right_part = b;
              F1Best& mine = results[wid];
              if (!mine.has || better(opt, mine)) {
                mine = opt;
                f1_registry_consider(w, full, mine);
              }
            }
        }
      } catch (const BudgetExpired&) {
        stop_ = true;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        stop_ = true;
      }
    };

    if (workers_.size() == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(workers_.size());
      for (std::size_t wid = 0; wid < workers_.size(); ++wid) threads.emplace_back(work, wid);
      for (auto& t : threads) t.join();
    }
    if (error) std::rethrow_exception(error);
    if (stop_) return;

    F1Best winner;
    for (const F1Best& r : results)
      if (r.has && (!winner.has || better(r, winner))) winner = r;
    if (!winner.has) throw InfeasibleError("no tree satisfies the minimum leaf support");

    Worker& w = workers_[0];
    Plan plan;
    if (winner.is_leaf) {
      plan.kind = Plan::Kind::Leaf;
      plan.label = winner.leaf_label;
      plan.counts = counts;
    } else {
      const SplitCandidate& cand = root_cands_[winner.cand_index];
      std::vector<std::uint32_t> left, right;
      split_region(full, cand, left, right);
      plan.kind = Plan::Kind::Split;
      plan.features = cand.features;
      plan.threshold = cand.threshold;
      plan.left = f1_replay(w, left, hp_.depth - 1, winner.left_part);
      plan.right = f1_replay(w, right, hp_.depth - 1, winner.right_part);
    }
    Outcome out = materialize(w, plan);
    std::lock_guard<std::mutex> lock(mu_);
    best_.has = true;
    best_.order = winner.order;
    best_.outcome = std::move(out);
  }

  // Materialize an F1 incumbent for the registry whenever a worker improves
  // its local best; keeps a usable tree available on budget expiry.
  void f1_registry_consider(Worker& w, const std::vector<std::uint32_t>& full,
                            const auto& candidate_best) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (best_.has && !(candidate_best.objective > best_.outcome.objective)) return;
    }
    Plan plan;
    if (candidate_best.is_leaf) {
      plan.kind = Plan::Kind::Leaf;
      plan.label = candidate_best.leaf_label;
      plan.counts = tally(full);
    } else {
      const SplitCandidate& cand = root_cands_[candidate_best.cand_index];
      std::vector<std::uint32_t> left, right;
      split_region(full, cand, left, right);
      plan.kind = Plan::Kind::Split;
      plan.features = cand.features;
      plan.threshold = cand.threshold;
      plan.left = f1_replay(w, left, hp_.depth - 1, candidate_best.left_part);
      plan.right = f1_replay(w, right, hp_.depth - 1, candidate_best.right_part);
    }
    Outcome out = materialize(w, plan);
    std::lock_guard<std::mutex> lock(mu_);
    if (!best_.has || out.objective > best_.outcome.objective) {
      best_.has = true;
      best_.order = candidate_best.order;
      best_.outcome = std::move(out);
      trace_.push_back({seconds_since_start(), best_.outcome.objective});
    }
  }

  // ---- Greedy seed ---------------------------------------------------------

  std::unique_ptr<Plan> greedy_plan(const std::vector<std::uint32_t>& region, int dr,
                                    bool is_root) {
    const auto counts = tally(region);
    const auto [leaf_cost, leaf_label] = model_.leaf_eval(counts);
    const bool leaf_ok = is_root ? hp_.min_leaf_support == 0
                                 : static_cast<long long>(region.size()) >= hp_.min_leaf_support;
    auto leaf = [&] {
      auto p = std::make_unique<Plan>();
      p->kind = Plan::Kind::Leaf;
      p->label = leaf_label;
      p->counts = counts;
      return p;
    };
    if (dr == 0 || (leaf_ok && leaf_cost == 0)) {
      if (!leaf_ok) throw InfeasibleError("no tree satisfies the minimum leaf support");
      return leaf();
    }
    auto cands = enumerate_candidates(data_, region, hp_.max_rule_features, min_side_);
    if (cands.empty()) {
      if (!leaf_ok) throw InfeasibleError("no tree satisfies the minimum leaf support");
      return leaf();
    }
    bool have = false;
    __int128 best_score = 0;
    std::size_t best_idx = 0;
    std::vector<std::uint32_t> left, right;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      split_region(region, cands[i], left, right);
      const __int128 score =
          model_.leaf_eval(tally(left)).first + model_.leaf_eval(tally(right)).first +
          model_.alpha_unit * static_cast<long long>(cands[i].features.size());
      if (!have || score < best_score) {
        have = true;
        best_score = score;
        best_idx = i;
      }
    }
    if (leaf_ok && leaf_cost <= best_score) return leaf();
    split_region(region, cands[best_idx], left, right);
    auto p = std::make_unique<Plan>();
    p->kind = Plan::Kind::Split;
    p->features = cands[best_idx].features;
    p->threshold = cands[best_idx].threshold;
    p->left = greedy_plan(left, dr - 1, false);
    p->right = greedy_plan(right, dr - 1, false);
    return p;
  }

  // ---- Plan materialization and the incumbent registry ---------------------

  void expand_deferred(Worker& w, Plan& plan) {
    if (plan.kind == Plan::Kind::Deferred) {
      std::unique_ptr<Plan> expanded = dp_replay(w, plan.region, plan.dr);
      plan = std::move(*expanded);
    }
    if (plan.kind == Plan::Kind::Split) {
      expand_deferred(w, *plan.left);
      expand_deferred(w, *plan.right);
    }
  }

  Outcome materialize(Worker& w, Plan& plan) {
    expand_deferred(w, plan);
    Outcome out;
    out.tree = BooleanTree(hp_.depth, data_.n_features, data_.n_classes);
    long long fn = 0, fp = 0;
    const bool binary = data_.n_classes == 2;
    auto walk = [&](auto&& self, const Plan& p, int node, int dr) -> void {
      if (p.kind == Plan::Kind::Leaf) {
        out.tree.leaf_labels[node << dr] = p.label;
        for (std::size_t k = 0; k < p.counts.size(); ++k)
          if (static_cast<int>(k) != p.label) out.tallies.errors += p.counts[k];
        if (binary) {
          if (p.label == 0) fn += p.counts[1];
          if (p.label == 1) fp += p.counts[0];
        }
        return;
      }
      out.tree.rules[node] = SplitRule{p.features, p.threshold};
      out.feat += static_cast<long long>(p.features.size());
      self(self, *p.left, 2 * node, dr - 1);
      self(self, *p.right, 2 * node + 1, dr - 1);
    };
    walk(walk, plan, 1, hp_.depth);
    if (binary) {
      out.tallies.false_negatives = fn;
      out.tallies.false_positives = fp;
    }
    out.tree.validate();
    out.objective = model_.objective_value(out.tallies.errors, fn, fp, out.feat);
    if (!model_.fractional) {
      __int128 cost = model_.alpha_unit * out.feat;
      auto add = [&](auto&& self, const Plan& p) -> void {
        if (p.kind == Plan::Kind::Leaf) {
          for (std::size_t k = 0; k < p.counts.size(); ++k)
            if (static_cast<int>(k) != p.label) cost += model_.miss_unit[k] * p.counts[k];
          return;
        }
        self(self, *p.left);
        self(self, *p.right);
      };
      add(add, plan);
      out.cost = cost;
    }
    return out;
  }

  void registry_consider(Outcome&& out, long long order) {
    std::lock_guard<std::mutex> lock(mu_);
    const bool improves =
        !best_.has ||
        (model_.fractional
             ? out.objective > best_.outcome.objective
             : out.cost < best_.outcome.cost ||
                   (out.cost == best_.outcome.cost && out.feat < best_.outcome.feat) ||
                   (out.cost == best_.outcome.cost && out.feat == best_.outcome.feat &&
                    order < best_.order));
    if (improves) {
      best_.has = true;
      best_.order = order;
      best_.outcome = std::move(out);
      trace_.push_back({seconds_since_start(), best_.outcome.objective});
    }
  }

  void registry_consider_copy(const Outcome& out, long long order) {
    Outcome copy = out;
    registry_consider(std::move(copy), order);
  }

  const BinaryDataset& data_;
  HyperParams hp_;
  ObjectiveKind obj_;
  SolveOptions opt_;
  CostModel model_;
  std::size_t words_;
  long long min_side_;

  Clock::time_point start_;
  Clock::time_point deadline_;
  std::size_t memo_cap_ = 0;  // per-worker cache byte share; 0 = unlimited
  std::vector<Worker> workers_;
  std::vector<SplitCandidate> root_cands_;
  std::atomic<bool> stop_{false};
  std::atomic<bool> truncated_{false};

  std::mutex mu_;
  Best best_;
  std::vector<TracePoint> trace_;
};

}  // namespace detail

// Exact search for the objective-optimal tree on `train`. Throws UsageError
// for invalid parameter combinations, DataError when the objective needs a
// class the data lacks, and InfeasibleError when no tree can satisfy the
// minimum leaf support. With a budget the result may be a feasible incumbent
// (status FeasibleTimeLimit) instead of the proven optimum.
inline SolveResult solve(const BinaryDataset& train, const HyperParams& hp, ObjectiveKind obj,
                         const SolveOptions& options = {}) {
  hp.validate();
  train.validate(/*require_two_classes=*/false);
  if (obj != ObjectiveKind::Accuracy && train.n_classes != 2)
    throw UsageError("the " + objective_name(obj) + " objective requires exactly two classes");
  if (static_cast<std::size_t>(hp.max_rule_features) > train.n_features)
    throw UsageError("max rule features exceeds the feature count");
  if (obj == ObjectiveKind::BalancedAccuracy &&
      (train.positives() == 0 || train.negatives() == 0))
    throw DataError("balanced accuracy needs both classes present");
  if (obj == ObjectiveKind::F1 && train.positives() == 0)
    throw DataError("f1 needs at least one positive instance");
  detail::SolverCore core(train, hp, obj, options);
  return core.run();
}

}  // namespace booltree
