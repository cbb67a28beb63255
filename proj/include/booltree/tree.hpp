#pragma once

// Decision trees over binary features where each branch node tests a
// Boolean rule: "is the number of true features among S_t at most b_t?"
// Yes routes left, no routes right. The tree skeleton is the complete
// binary tree of a fixed depth; branch nodes may be inactive (no rule),
// in which case routing falls through to the left child.

#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "dataset.hpp"

namespace booltree {

/// Node ids follow the classic heap layout: root is 1, node t has children
/// 2t and 2t+1. For depth D the branch nodes are 1..2^D-1 and the leaves
/// 2^D..2^(D+1)-1.
struct TreeTopology {
  int depth = 1;

  explicit TreeTopology(int d = 1) : depth(d) {
    if (d < 1) throw UsageError("tree depth must be at least 1");
    if (d > 20) throw UsageError("tree depth too large");
  }

  int total_nodes() const { return (1 << (depth + 1)) - 1; }
  int leaf_begin() const { return 1 << depth; }          // first leaf id
  int leaf_end() const { return 1 << (depth + 1); }      // one past last leaf
  bool is_branch(int t) const { return t >= 1 && t < leaf_begin(); }
  bool is_leaf(int t) const { return t >= leaf_begin() && t < leaf_end(); }
  static int parent(int t) { return t / 2; }

  /// 1-based level of a node: root is level 1, leaves are level depth+1.
  static int level(int t) {
    int lv = 0;
    while (t) {
      ++lv;
      t /= 2;
    }
    return lv;
  }

  /// All proper ancestors of t, root first.
  std::vector<int> ancestors(int t) const {
    std::vector<int> up;
    for (int s = parent(t); s >= 1; s = parent(s)) up.push_back(s);
    std::reverse(up.begin(), up.end());
    return up;
  }

  /// Ancestors whose LEFT child lies on the path to t.
  std::vector<int> left_ancestors(int t) const {
    std::vector<int> out;
    for (int s : ancestors(t))
      if (on_path_child(s, t) == 2 * s) out.push_back(s);
    return out;
  }

  /// Ancestors whose RIGHT child lies on the path to t.
  std::vector<int> right_ancestors(int t) const {
    std::vector<int> out;
    for (int s : ancestors(t))
      if (on_path_child(s, t) == 2 * s + 1) out.push_back(s);
    return out;
  }

  /// Branch nodes s (ancestors of leaf t) such that t is the leftmost leaf
  /// of the subtree rooted at the child of s lying on the path to t.
  std::vector<int> potential_parents(int t) const {
    if (!is_leaf(t)) throw UsageError("potential_parents expects a leaf id");
    std::vector<int> out;
    for (int s : ancestors(t))
      if (leftmost_leaf(on_path_child(s, t)) == t) out.push_back(s);
    return out;
  }

  /// The child of ancestor s on the path from s down to t.
  static int on_path_child(int s, int t) {
    int u = t;
    while (parent(u) != s) u = parent(u);
    return u;
  }

  int leftmost_leaf(int t) const {
    while (is_branch(t)) t = 2 * t;
    return t;
  }
};

/// One branch-node rule: route left iff the count of true features among
/// `features` is at most `threshold`.
struct SplitRule {
  std::vector<int> features;  // sorted, distinct, 0-based
  int threshold = 0;          // in 0..|features|-1

  bool operator==(const SplitRule&) const = default;
};

/// Hyper-parameters shared by the solver and the model builders.
struct HyperParams {
  int depth = 2;              // D
  int max_rule_features = 3;  // most features allowed in one rule
  int min_leaf_support = 1;   // fewest instances a populated leaf may hold
  Rational alpha = Rational(0);
  Rational cost_fp = Rational(1);  // cost of predicting 1 on a true 0
  Rational cost_fn = Rational(1);  // cost of predicting 0 on a true 1

  void validate() const {
    if (depth < 1) throw UsageError("depth must be at least 1");
    if (max_rule_features < 1) throw UsageError("max rule features must be at least 1");
    if (min_leaf_support < 0) throw UsageError("min leaf support must be nonnegative");
    if (alpha < Rational(0)) throw UsageError("alpha must be nonnegative");
    if (cost_fp <= Rational(0) || cost_fn <= Rational(0))
      throw UsageError("misclassification costs must be positive");
  }
};

class BooleanTree {
 public:
  TreeTopology topology;
  std::vector<std::optional<SplitRule>> rules;  // indexed by branch node id
  std::vector<int> leaf_labels;                 // indexed by node id, -1 = none
  std::size_t n_features = 0;
  int n_classes = 2;

  BooleanTree() : BooleanTree(1, 1, 2) {}
  BooleanTree(int depth, std::size_t n_features_, int n_classes_)
      : topology(depth),
        rules(topology.leaf_begin()),
        leaf_labels(topology.leaf_end(), -1),
        n_features(n_features_),
        n_classes(n_classes_) {}

  bool active(int t) const { return topology.is_branch(t) && rules[t].has_value(); }

  /// A leaf (or branch node) is reachable iff every ancestor the path turns
  /// right at is active — inactive nodes always send instances left.
  bool reachable(int t) const {
    for (int s : topology.right_ancestors(t))
      if (!active(s)) return false;
    return true;
  }

  /// Walk one instance from the root to its depth-D leaf.
  int route(std::span<const std::uint8_t> x) const {
    if (x.size() != n_features)
      throw DataError("instance has " + std::to_string(x.size()) + " features, tree expects " +
                      std::to_string(n_features));
    int t = 1;
    while (topology.is_branch(t)) {
      if (!rules[t]) {
        t = 2 * t;
        continue;
      }
      int count = 0;
      for (int f : rules[t]->features) count += x[f];
      t = count <= rules[t]->threshold ? 2 * t : 2 * t + 1;
    }
    return t;
  }

  int predict(std::span<const std::uint8_t> x) const {
    const int leaf = route(x);
    const int label = leaf_labels[leaf];
    if (label < 0)
      throw DataError("instance routed to unlabeled leaf " + std::to_string(leaf) +
                      "; the model file is incomplete");
    return label;
  }

  std::vector<int> predict_all(const BinaryDataset& data) const {
    std::vector<int> out(data.n);
    for (std::size_t i = 0; i < data.n; ++i)
      out[i] = predict({data.x.data() + i * data.n_features, data.n_features});
    return out;
  }

  int count_active() const {
    int k = 0;
    for (int t = 1; t < topology.leaf_begin(); ++t) k += active(t);
    return k;
  }

  /// Total features used across all active rules (the complexity the
  /// regularizer charges for).
  int total_rule_features() const {
    int k = 0;
    for (int t = 1; t < topology.leaf_begin(); ++t)
      if (rules[t]) k += static_cast<int>(rules[t]->features.size());
    return k;
  }

  /// Throw unless the tree is structurally sound: rules sorted/distinct and
  /// in range, thresholds within 0..|S|-1, children of inactive nodes
  /// inactive, reachable leaves labeled, labels within the class count.
  void validate() const {
    for (int t = 1; t < topology.leaf_begin(); ++t) {
      if (!rules[t]) continue;
      const auto& r = *rules[t];
      if (r.features.empty()) throw DataError("node " + std::to_string(t) + ": empty rule");
      for (std::size_t i = 0; i < r.features.size(); ++i) {
        if (r.features[i] < 0 || r.features[i] >= static_cast<int>(n_features))
          throw DataError("node " + std::to_string(t) + ": feature index out of range");
        if (i > 0 && r.features[i] <= r.features[i - 1])
          throw DataError("node " + std::to_string(t) + ": features must be sorted and distinct");
      }
      if (r.threshold < 0 || r.threshold > static_cast<int>(r.features.size()) - 1)
        throw DataError("node " + std::to_string(t) + ": threshold " +
                        std::to_string(r.threshold) + " outside 0.." +
                        std::to_string(r.features.size() - 1));
      if (t > 1 && !active(TreeTopology::parent(t)))
        throw DataError("node " + std::to_string(t) + ": active under an inactive parent");
    }
    for (int t = topology.leaf_begin(); t < topology.leaf_end(); ++t) {
      if (leaf_labels[t] >= n_classes)
        throw DataError("leaf " + std::to_string(t) + ": label out of range");
      if (reachable(t) && leaf_labels[t] < 0)
        throw DataError("leaf " + std::to_string(t) + ": reachable but unlabeled");
    }
  }

  bool operator==(const BooleanTree& o) const {
    return topology.depth == o.topology.depth && rules == o.rules &&
           leaf_labels == o.leaf_labels && n_features == o.n_features &&
           n_classes == o.n_classes;
  }
};

/// Depth a univariate tree would need to express the same classifier:
/// per level, take the largest rule size N among active nodes and charge
/// 2^(N-1); levels without active nodes charge nothing.
inline int equivalent_univariate_depth(const BooleanTree& tree) {
  std::vector<int> level_max(tree.topology.depth + 1, 0);
  for (int t = 1; t < tree.topology.leaf_begin(); ++t)
    if (tree.rules[t])
      level_max[TreeTopology::level(t)] =
          std::max(level_max[TreeTopology::level(t)],
                   static_cast<int>(tree.rules[t]->features.size()));
  int total = 0;
  bool any = false;
  for (int d = 1; d <= tree.topology.depth; ++d) {
    if (level_max[d] == 0) continue;
    any = true;
    total += 1 << (level_max[d] - 1);
  }
  if (!any) throw DataError("tree has no active splits");
  return total;
}

/// Normal form: rule features sorted, rules under inactive nodes removed,
/// labels removed from unreachable leaves. Prediction is unchanged.
inline BooleanTree canonicalize(const BooleanTree& tree) {
  BooleanTree out = tree;
  for (int t = 1; t < out.topology.leaf_begin(); ++t) {
    if (t > 1 && !out.active(TreeTopology::parent(t))) out.rules[t].reset();
    if (out.rules[t]) std::sort(out.rules[t]->features.begin(), out.rules[t]->features.end());
  }
  for (int t = out.topology.leaf_begin(); t < out.topology.leaf_end(); ++t)
    if (!out.reachable(t)) out.leaf_labels[t] = -1;
  return out;
}

// ---------------------------------------------------------------------------
// Model files. Line-oriented text so a fitted tree is directly readable:
//
//   booltree-model 1
//   depth 2
//   features 5
//   classes 2
//   node 1 rule f1+f2+f3 <= 1
//   node 2 label 0
//   node 3 label 1
//
// Feature tokens are 1-based (f1 is the first column). Inactive branch
// nodes and unlabeled leaves are omitted.
// ---------------------------------------------------------------------------

inline void save_tree(const BooleanTree& tree, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "booltree-model 1\n";
  out << "depth " << tree.topology.depth << '\n';
  out << "features " << tree.n_features << '\n';
  out << "classes " << tree.n_classes << '\n';
  for (int t = 1; t < tree.topology.leaf_begin(); ++t) {
    if (!tree.rules[t]) continue;
    out << "node " << t << " rule ";
    for (std::size_t i = 0; i < tree.rules[t]->features.size(); ++i) {
      if (i) out << '+';
      out << 'f' << tree.rules[t]->features[i] + 1;
    }
    out << " <= " << tree.rules[t]->threshold << '\n';
  }
  for (int t = tree.topology.leaf_begin(); t < tree.topology.leaf_end(); ++t)
    if (tree.leaf_labels[t] >= 0) out << "node " << t << " label " << tree.leaf_labels[t] << '\n';
  if (!out) throw DataError("write failed: " + path);
}

inline BooleanTree load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model file: " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "booltree-model 1")
    throw FormatError(path + ": missing 'booltree-model 1' header");

  auto header_int = [&](const std::string& key) -> long long {
    if (!std::getline(in, line)) throw FormatError(path + ": truncated header");
    std::istringstream ss(line);
    std::string word;
    long long value;
    if (!(ss >> word >> value) || word != key)
      throw FormatError(path + ": expected '" + key + " <n>', got: " + line);
    return value;
  };
  const long long depth = header_int("depth");
  const long long n_features = header_int("features");
  const long long n_classes = header_int("classes");
  if (depth < 1 || depth > 20) throw FormatError(path + ": bad depth");
  if (n_features < 1) throw FormatError(path + ": bad feature count");
  if (n_classes < 2) throw FormatError(path + ": bad class count");

  BooleanTree tree(static_cast<int>(depth), static_cast<std::size_t>(n_features),
                   static_cast<int>(n_classes));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string word, kind;
    int t;
    if (!(ss >> word >> t >> kind) || word != "node")
      throw FormatError(path + ": malformed line: " + line);
    if (kind == "rule") {
      if (!tree.topology.is_branch(t))
        throw FormatError(path + ": node " + std::to_string(t) + " is not a branch node");
      std::string expr, arrow;
      int threshold;
      if (!(ss >> expr >> arrow >> threshold) || arrow != "<=")
        throw FormatError(path + ": malformed rule line: " + line);
      SplitRule rule;
      for (const auto& tok : split(expr, '+')) {
        if (tok.size() < 2 || tok[0] != 'f')
          throw FormatError(path + ": bad feature token '" + tok + "'");
        long long j;
        try {
          j = std::stoll(tok.substr(1));
        } catch (const std::exception&) {
          throw FormatError(path + ": bad feature token '" + tok + "'");
        }
        if (j < 1 || j > static_cast<long long>(n_features))
          throw FormatError(path + ": node " + std::to_string(t) + ": feature " + tok +
                            " out of range");
        rule.features.push_back(static_cast<int>(j - 1));
      }
      rule.threshold = threshold;
      tree.rules[t] = std::move(rule);
    } else if (kind == "label") {
      if (!tree.topology.is_leaf(t))
        throw FormatError(path + ": node " + std::to_string(t) + " is not a leaf");
      int label;
      if (!(ss >> label)) throw FormatError(path + ": malformed label line: " + line);
      if (label < 0 || label >= n_classes)
        throw FormatError(path + ": leaf " + std::to_string(t) + ": label out of range");
      tree.leaf_labels[t] = label;
    } else {
      throw FormatError(path + ": unknown node kind '" + kind + "'");
    }
  }
  try {
    tree.validate();
  } catch (const DataError& e) {
    throw FormatError(path + ": " + e.what());
  }
  return tree;
}

}  // namespace booltree
