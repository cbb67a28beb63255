#pragma once

// Mixed-integer formulation of the tree-learning problem, written out as an
// abstract model so it can be checked in exact arithmetic, emitted as an LP
// file for an external solver, and decoded back into a tree from a solution
// file. The F1 objective needs one bilinear constraint; everything else is
// linear.
//
// Variable naming (1-based instances and features, heap node ids):
//   d_<t>       branch node t carries an active rule
//   b_<t>       rule threshold at branch node t
//   a_<t>_f<j>  feature j participates in the rule at t
//   l_<t>       leaf t is switched on (carries a label)
//   c_<t>_<k>   leaf t is labeled with class k
//   z_<i>_<t>   instance i lands at leaf t
//   M_<k>_<t>   count of class-k instances at leaf t
//   N_<t>       count of instances at leaf t
//   e_<t>       misclassified instances at leaf t        (accuracy model)
//   e_<t>_<k>   misclassified at leaf t when labeled k   (two-class models)
//   F_1         the F1 score                              (f1 model)

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "dataset.hpp"
#include "metrics.hpp"
#include "tree.hpp"

namespace booltree {

enum class VarType { Binary, Integer, Continuous };
enum class Sense { Le, Eq, Ge };

struct VarDecl {
  std::string name;
  VarType type = VarType::Continuous;
  Rational lb{0};
  Rational ub{0};
};

struct LinCon {
  std::string name;
  std::vector<std::pair<std::size_t, Rational>> terms;  // (variable index, coefficient)
  Sense sense = Sense::Le;
  Rational rhs{0};
};

struct QuadTerm {
  std::size_t v1 = 0, v2 = 0;
  Rational coef{0};
};

struct QuadCon {
  std::string name;
  std::vector<std::pair<std::size_t, Rational>> lin;
  std::vector<QuadTerm> quad;
  Sense sense = Sense::Le;
  Rational rhs{0};
};

struct ModelSpec {
  std::vector<VarDecl> variables;
  std::unordered_map<std::string, std::size_t> var_index;
  std::vector<LinCon> constraints;
  std::optional<QuadCon> quad;
  bool maximize = false;
  Rational obj_constant{0};
  std::vector<std::pair<std::size_t, Rational>> obj_terms;

  // Dataset context, present on built models (absent after read_lp).
  bool has_context = false;
  HyperParams hp;
  ObjectiveKind objective = ObjectiveKind::Accuracy;
  std::size_t n = 0;
  std::size_t n_features = 0;
  int n_classes = 0;
  long long n_pos = 0, n_neg = 0;

  std::size_t add_var(const std::string& name, VarType type, Rational lb, Rational ub) {
    if (!var_index.emplace(name, variables.size()).second)
      throw UsageError("duplicate variable '" + name + "'");
    variables.push_back({name, type, lb, ub});
    return variables.size() - 1;
  }

  std::size_t index(const std::string& name) const {
    auto it = var_index.find(name);
    if (it == var_index.end()) throw UsageError("unknown variable '" + name + "'");
    return it->second;
  }
};

/// Variable name builders. t is a heap node id; i and f are 0-based
/// internally and rendered 1-based.
inline std::string var_d(int t) { return "d_" + std::to_string(t); }
inline std::string var_b(int t) { return "b_" + std::to_string(t); }
inline std::string var_a(int t, std::size_t f) {
  return "a_" + std::to_string(t) + "_f" + std::to_string(f + 1);
}
inline std::string var_l(int t) { return "l_" + std::to_string(t); }
inline std::string var_c(int t, int k) {
  return "c_" + std::to_string(t) + "_" + std::to_string(k);
}
inline std::string var_z(std::size_t i, int t) {
  return "z_" + std::to_string(i + 1) + "_" + std::to_string(t);
}
inline std::string var_M(int k, int t) {
  return "M_" + std::to_string(k) + "_" + std::to_string(t);
}
inline std::string var_N(int t) { return "N_" + std::to_string(t); }
inline std::string var_e(int t) { return "e_" + std::to_string(t); }
inline std::string var_e(int t, int k) {
  return "e_" + std::to_string(t) + "_" + std::to_string(k);
}

inline ModelSpec build_model(const BinaryDataset& train, const HyperParams& hp,
                             ObjectiveKind obj) {
  hp.validate();
  train.validate();
  if (train.n == 0) throw DataError("cannot build a model from an empty training set");
  if (obj != ObjectiveKind::Accuracy && train.n_classes != 2)
    throw UsageError("the " + objective_name(obj) + " objective requires exactly two classes");
  if (hp.max_rule_features > static_cast<int>(train.n_features))
    throw UsageError("max rule features (" + std::to_string(hp.max_rule_features) +
                     ") exceeds the feature count (" + std::to_string(train.n_features) + ")");

  const long long n_pos = train.n_classes == 2 ? train.positives() : 0;
  const long long n_neg = train.n_classes == 2 ? train.negatives() : 0;
  if (obj == ObjectiveKind::BalancedAccuracy && (n_pos == 0 || n_neg == 0))
    throw DataError("balanced accuracy needs training instances of both classes");
  if (obj == ObjectiveKind::F1 && n_pos == 0)
    throw DataError("the F1 objective needs at least one positive training instance");

  const TreeTopology topo(hp.depth);
  const long long n = static_cast<long long>(train.n);
  const int K = train.n_classes;
  const int fmax = hp.max_rule_features;

  ModelSpec m;
  m.has_context = true;
  m.hp = hp;
  m.objective = obj;
  m.n = train.n;
  m.n_features = train.n_features;
  m.n_classes = K;
  m.n_pos = n_pos;
  m.n_neg = n_neg;

  // Declarations, grouped by family so the LP layout is predictable.
  for (int t = 1; t < topo.leaf_begin(); ++t)
    m.add_var(var_d(t), VarType::Binary, Rational(0), Rational(1));
  for (int t = 1; t < topo.leaf_begin(); ++t)
    m.add_var(var_b(t), VarType::Integer, Rational(0), Rational(fmax - 1));
  for (int t = 1; t < topo.leaf_begin(); ++t)
    for (std::size_t f = 0; f < train.n_features; ++f)
      m.add_var(var_a(t, f), VarType::Binary, Rational(0), Rational(1));
  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
    m.add_var(var_l(t), VarType::Binary, Rational(0), Rational(1));
  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
    for (int k = 0; k < K; ++k)
      m.add_var(var_c(t, k), VarType::Binary, Rational(0), Rational(1));
  for (std::size_t i = 0; i < train.n; ++i)
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
      m.add_var(var_z(i, t), VarType::Binary, Rational(0), Rational(1));
  for (int k = 0; k < K; ++k)
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
      m.add_var(var_M(k, t), VarType::Integer, Rational(0), Rational(n));
  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
    m.add_var(var_N(t), VarType::Integer, Rational(0), Rational(n));
  if (obj == ObjectiveKind::Accuracy) {
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
      m.add_var(var_e(t), VarType::Continuous, Rational(0), Rational(n));
  } else {
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
      for (int k = 0; k < 2; ++k)
        m.add_var(var_e(t, k), VarType::Continuous, Rational(0), Rational(n));
  }
  if (obj == ObjectiveKind::F1)
    m.add_var("F_1", VarType::Continuous, Rational(0), Rational(1));

  auto add_con = [&](const std::string& name, Sense sense, Rational rhs) -> LinCon& {
    m.constraints.push_back({name, {}, sense, rhs});
    return m.constraints.back();
  };
  auto term = [&](LinCon& c, const std::string& var, Rational coef) {
    if (coef != Rational(0)) c.terms.emplace_back(m.index(var), coef);
  };

  // Rule-size cap: a node selects at most fmax features, none when inactive.
  for (int t = 1; t < topo.leaf_begin(); ++t) {
    auto& c = add_con("feat_cap_" + std::to_string(t), Sense::Le, Rational(0));
    for (std::size_t f = 0; f < train.n_features; ++f) term(c, var_a(t, f), Rational(1));
    term(c, var_d(t), Rational(-fmax));
  }
  // Threshold stays below the rule-size cap and collapses to 0 when inactive.
  for (int t = 1; t < topo.leaf_begin(); ++t) {
    auto& c = add_con("thresh_cap_" + std::to_string(t), Sense::Le, Rational(0));
    term(c, var_b(t), Rational(1));
    term(c, var_d(t), Rational(-(fmax - 1)));
  }
  // A node can only split if its parent does.
  for (int t = 2; t < topo.leaf_begin(); ++t) {
    auto& c = add_con("split_nest_" + std::to_string(t), Sense::Le, Rational(0));
    term(c, var_d(t), Rational(1));
    term(c, var_d(TreeTopology::parent(t)), Rational(-1));
  }
  // A leaf that is on carries exactly one class label.
  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
    auto& c = add_con("leaf_label_" + std::to_string(t), Sense::Eq, Rational(0));
    for (int k = 0; k < K; ++k) term(c, var_c(t, k), Rational(1));
    term(c, var_l(t), Rational(-1));
  }
  // A leaf is on exactly when one of its potential parent splits is active.
  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
    auto& ub = add_con("leaf_on_ub_" + std::to_string(t), Sense::Le, Rational(0));
    term(ub, var_l(t), Rational(1));
    for (int s : topo.potential_parents(t)) term(ub, var_d(s), Rational(-1));
    auto& lb = add_con("leaf_on_lb_" + std::to_string(t), Sense::Ge, Rational(0));
    term(lb, var_l(t), Rational(hp.depth));
    for (int s : topo.potential_parents(t)) term(lb, var_d(s), Rational(-1));
  }
  // Every instance lands at exactly one leaf, and only at leaves that are on.
  for (std::size_t i = 0; i < train.n; ++i) {
    auto& c = add_con("assign_one_" + std::to_string(i + 1), Sense::Eq, Rational(1));
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) term(c, var_z(i, t), Rational(1));
  }
  for (std::size_t i = 0; i < train.n; ++i)
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
      auto& c = add_con("assign_leaf_" + std::to_string(i + 1) + "_" + std::to_string(t),
                        Sense::Le, Rational(0));
      term(c, var_z(i, t), Rational(1));
      term(c, var_l(t), Rational(-1));
    }
  // Leaves that are on hold at least the minimum support.
  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
    auto& c = add_con("leaf_support_" + std::to_string(t), Sense::Ge, Rational(0));
    for (std::size_t i = 0; i < train.n; ++i) term(c, var_z(i, t), Rational(1));
    term(c, var_l(t), Rational(-hp.min_leaf_support));
  }
  // Routing. An instance at leaf t passed every ancestor: on the right side
  // its rule count must exceed the threshold, on the left side stay at it.
  for (std::size_t i = 0; i < train.n; ++i) {
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
      for (int s : topo.right_ancestors(t)) {
        auto& c = add_con("route_right_" + std::to_string(i + 1) + "_" + std::to_string(t) +
                              "_" + std::to_string(s),
                          Sense::Ge, Rational(-fmax));
        for (std::size_t f = 0; f < train.n_features; ++f)
          if (train.at(i, f)) term(c, var_a(s, f), Rational(1));
        term(c, var_b(s), Rational(-1));
        term(c, var_d(s), Rational(-1));
        term(c, var_z(i, t), Rational(-fmax));
      }
      for (int s : topo.left_ancestors(t)) {
        auto& c = add_con("route_left_" + std::to_string(i + 1) + "_" + std::to_string(t) +
                              "_" + std::to_string(s),
                          Sense::Le, Rational(fmax));
        for (std::size_t f = 0; f < train.n_features; ++f)
          if (train.at(i, f)) term(c, var_a(s, f), Rational(1));
        term(c, var_b(s), Rational(-1));
        term(c, var_z(i, t), Rational(fmax));
      }
    }
  }
  // Per-leaf class counts and totals.
  for (int k = 0; k < K; ++k)
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
      auto& c = add_con("class_count_" + std::to_string(k) + "_" + std::to_string(t),
                        Sense::Eq, Rational(0));
      term(c, var_M(k, t), Rational(1));
      for (std::size_t i = 0; i < train.n; ++i)
        if (train.y[i] == k) term(c, var_z(i, t), Rational(-1));
    }
  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
    auto& c = add_con("leaf_count_" + std::to_string(t), Sense::Eq, Rational(0));
    term(c, var_N(t), Rational(1));
    for (std::size_t i = 0; i < train.n; ++i) term(c, var_z(i, t), Rational(-1));
  }

  // Misclassification accounting.
  if (obj == ObjectiveKind::Accuracy) {
    // e_t >= N_t - M_kt - n(1 - c_tk) activates for the chosen label;
    // e_t <= N_t - M_kt for every k forces that label onto a majority class.
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
      for (int k = 0; k < K; ++k) {
        auto& lb = add_con("err_lb_" + std::to_string(t) + "_" + std::to_string(k),
                           Sense::Ge, Rational(-n));
        term(lb, var_e(t), Rational(1));
        term(lb, var_N(t), Rational(-1));
        term(lb, var_M(k, t), Rational(1));
        term(lb, var_c(t, k), Rational(-n));
        auto& ub = add_con("err_ub_" + std::to_string(t) + "_" + std::to_string(k),
                           Sense::Le, Rational(0));
        term(ub, var_e(t), Rational(1));
        term(ub, var_N(t), Rational(-1));
        term(ub, var_M(k, t), Rational(1));
      }
      auto& nn = add_con("err_nonneg_" + std::to_string(t), Sense::Ge, Rational(0));
      term(nn, var_e(t), Rational(1));
    }
  } else {
    // Two-class variants book errors per label choice: e_tk is the error
    // count at leaf t if it is labeled k, and 0 otherwise.
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
      for (int k = 0; k < 2; ++k) {
        auto& lb = add_con("err_lb_" + std::to_string(t) + "_" + std::to_string(k),
                           Sense::Ge, Rational(-n));
        term(lb, var_e(t, k), Rational(1));
        term(lb, var_N(t), Rational(-1));
        term(lb, var_M(k, t), Rational(1));
        term(lb, var_c(t, k), Rational(-n));
        auto& ub = add_con("err_ub_" + std::to_string(t) + "_" + std::to_string(k),
                           Sense::Le, Rational(0));
        term(ub, var_e(t, k), Rational(1));
        term(ub, var_N(t), Rational(-1));
        term(ub, var_M(k, t), Rational(1));
        auto& gate = add_con("errk_gate_" + std::to_string(t) + "_" + std::to_string(k),
                             Sense::Le, Rational(0));
        term(gate, var_e(t, k), Rational(1));
        term(gate, var_c(t, k), Rational(-n));
        auto& nn = add_con("err_nonneg_" + std::to_string(t) + "_" + std::to_string(k),
                           Sense::Ge, Rational(0));
        term(nn, var_e(t, k), Rational(1));
      }
  }

  // F1 definition: F_1 * (2 n_pos + FP - FN) <= 2 (n_pos - FN), with
  // FN = sum of e_t0 and FP = sum of e_t1.
  if (obj == ObjectiveKind::F1) {
    QuadCon q;
    q.name = "f1_def";
    q.sense = Sense::Le;
    q.rhs = Rational(2 * n_pos);
    q.lin.emplace_back(m.index("F_1"), Rational(2 * n_pos));
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
      q.lin.emplace_back(m.index(var_e(t, 0)), Rational(2));
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
      q.quad.push_back({m.index("F_1"), m.index(var_e(t, 1)), Rational(1)});
      q.quad.push_back({m.index("F_1"), m.index(var_e(t, 0)), Rational(-1)});
    }
    m.quad = std::move(q);
  }

  // Objective.
  auto obj_term = [&](const std::string& var, Rational coef) {
    if (coef != Rational(0)) m.obj_terms.emplace_back(m.index(var), coef);
  };
  switch (obj) {
    case ObjectiveKind::Accuracy:
      m.maximize = false;
      for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
        obj_term(var_e(t), Rational(1, n));
      break;
    case ObjectiveKind::CostSensitive:
      m.maximize = false;
      for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
        obj_term(var_e(t, 1), hp.cost_fp / Rational(n));
        obj_term(var_e(t, 0), hp.cost_fn / Rational(n));
      }
      break;
    case ObjectiveKind::BalancedAccuracy:
      m.maximize = true;
      m.obj_constant = Rational(1);
      for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
        obj_term(var_e(t, 0), Rational(-1, 2 * n_pos));
        obj_term(var_e(t, 1), Rational(-1, 2 * n_neg));
      }
      break;
    case ObjectiveKind::F1:
      m.maximize = true;
      obj_term("F_1", Rational(1));
      break;
  }
  const Rational alpha_sign = m.maximize ? -hp.alpha : hp.alpha;
  for (int t = 1; t < topo.leaf_begin(); ++t)
    for (std::size_t f = 0; f < train.n_features; ++f) obj_term(var_a(t, f), alpha_sign);

  return m;
}

// ---------------------------------------------------------------------------
// Assignment checking.
// ---------------------------------------------------------------------------

using Assignment = std::map<std::string, Rational>;

struct CheckReport {
  bool feasible = false;
  std::vector<std::string> violations;  // constraint/bound names
  Rational objective{0};
};

/// Feasibility tolerance used when judging constraints, bounds, and
/// integrality of an assignment (values from external solvers carry float
/// noise). Pinned at 1e-6.
inline const Rational kFeasTol = Rational(1, 1000000);

inline CheckReport check_assignment(const ModelSpec& m, const Assignment& a) {
  std::vector<Rational> val(m.variables.size());
  for (std::size_t v = 0; v < m.variables.size(); ++v) {
    auto it = a.find(m.variables[v].name);
    if (it == a.end())
      throw UsageError("assignment is missing variable '" + m.variables[v].name + "'");
    val[v] = it->second;
  }

  CheckReport report;
  for (std::size_t v = 0; v < m.variables.size(); ++v) {
    const auto& decl = m.variables[v];
    if (val[v] < decl.lb - kFeasTol || val[v] > decl.ub + kFeasTol)
      report.violations.push_back("bound:" + decl.name);
    if (decl.type != VarType::Continuous) {
      const Rational nearest(std::llround(to_double(val[v])));
      if (val[v] - nearest > kFeasTol || nearest - val[v] > kFeasTol)
        report.violations.push_back("integral:" + decl.name);
    }
  }

  auto violated = [&](Sense sense, const Rational& lhs, const Rational& rhs) {
    switch (sense) {
      case Sense::Le: return lhs > rhs + kFeasTol;
      case Sense::Ge: return lhs < rhs - kFeasTol;
      case Sense::Eq: return lhs > rhs + kFeasTol || lhs < rhs - kFeasTol;
    }
    return true;
  };
  for (const auto& c : m.constraints) {
    Rational lhs(0);
    for (const auto& [v, coef] : c.terms) lhs += coef * val[v];
    if (violated(c.sense, lhs, c.rhs)) report.violations.push_back(c.name);
  }
  if (m.quad) {
    Rational lhs(0);
    for (const auto& [v, coef] : m.quad->lin) lhs += coef * val[v];
    for (const auto& q : m.quad->quad) lhs += q.coef * val[q.v1] * val[q.v2];
    if (violated(m.quad->sense, lhs, m.quad->rhs)) report.violations.push_back(m.quad->name);
  }

  report.objective = m.obj_constant;
  for (const auto& [v, coef] : m.obj_terms) report.objective += coef * val[v];
  report.feasible = report.violations.empty();
  return report;
}

// ---------------------------------------------------------------------------
// LP emission and re-reading.
// ---------------------------------------------------------------------------

namespace detail {

inline void append_terms(std::string& out, const std::vector<std::pair<std::size_t, Rational>>& terms,
                         const std::vector<VarDecl>& vars, bool& first) {
  for (const auto& [v, coef] : terms) {
    const double c = to_double(coef);
    if (first) {
      if (c < 0) out += "- ";
      first = false;
    } else {
      out += c < 0 ? " - " : " + ";
    }
    out += format_g17(std::abs(c));
    out += ' ';
    out += vars[v].name;
  }
}

}  // namespace detail

inline std::string lp_sense(Sense s) {
  switch (s) {
    case Sense::Le: return "<=";
    case Sense::Eq: return "=";
    case Sense::Ge: return ">=";
  }
  return "<=";
}

inline std::string emit_lp_string(const ModelSpec& m) {
  std::string out;
  out.reserve(1 << 16);
  out += m.maximize ? "Maximize\n" : "Minimize\n";
  out += " obj: ";
  bool first = true;
  detail::append_terms(out, m.obj_terms, m.variables, first);
  if (m.obj_constant != Rational(0) || m.obj_terms.empty()) {
    const double c = to_double(m.obj_constant);
    if (first)
      out += (c < 0 ? "- " : "") + format_g17(std::abs(c));
    else
      out += (c < 0 ? " - " : " + ") + format_g17(std::abs(c));
  }
  out += "\nSubject To\n";
  for (const auto& con : m.constraints) {
    out += ' ';
    out += con.name;
    out += ": ";
    bool f = true;
    detail::append_terms(out, con.terms, m.variables, f);
    if (f) out += "0";  // constraint whose coefficients all vanished
    out += ' ';
    out += lp_sense(con.sense);
    out += ' ';
    out += format_g17(to_double(con.rhs));
    out += '\n';
  }
  if (m.quad) {
    out += ' ';
    out += m.quad->name;
    out += ": ";
    bool f = true;
    detail::append_terms(out, m.quad->lin, m.variables, f);
    out += f ? "[ " : " + [ ";
    bool qf = true;
    for (const auto& q : m.quad->quad) {
      const double c = to_double(q.coef);
      if (qf) {
        if (c < 0) out += "- ";
        qf = false;
      } else {
        out += c < 0 ? " - " : " + ";
      }
      out += format_g17(std::abs(c)) + ' ' + m.variables[q.v1].name + " * " +
             m.variables[q.v2].name;
    }
    out += " ] ";
    out += lp_sense(m.quad->sense);
    out += ' ';
    out += format_g17(to_double(m.quad->rhs));
    out += '\n';
  }
  out += "Bounds\n";
  for (const auto& v : m.variables) {
    if (v.type == VarType::Binary) continue;
    out += ' ' + format_g17(to_double(v.lb)) + " <= " + v.name + " <= " +
           format_g17(to_double(v.ub)) + '\n';
  }
  std::vector<std::string> binaries, generals;
  for (const auto& v : m.variables) {
    if (v.type == VarType::Binary) binaries.push_back(v.name);
    if (v.type == VarType::Integer) generals.push_back(v.name);
  }
  auto name_section = [&](const char* title, const std::vector<std::string>& names) {
    if (names.empty()) return;
    out += title;
    out += '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
      out += i % 8 == 0 ? (i ? "\n " : " ") : " ";
      out += names[i];
    }
    out += '\n';
  };
  name_section("Binaries", binaries);
  name_section("Generals", generals);
  out += "End\n";
  return out;
}

inline void emit_lp(const ModelSpec& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << emit_lp_string(m);
  if (!out) throw DataError("write failed: " + path);
}

/// Parse an LP file of the dialect emit_lp writes (linear + optional
/// quadratic constraints, Bounds/Binaries/Generals sections). Variables are
/// created on first mention; types and bounds are applied from the trailing
/// sections. The result carries no dataset context.
inline ModelSpec read_lp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open LP file: " + path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '\\') continue;  // comment line
    lines.push_back(line);
  }

  ModelSpec m;
  std::map<std::string, std::pair<Rational, Rational>> bounds;
  std::vector<std::string> binaries, generals;

  auto ensure_var = [&](const std::string& name) -> std::size_t {
    auto it = m.var_index.find(name);
    if (it != m.var_index.end()) return it->second;
    return m.add_var(name, VarType::Continuous, Rational(0), Rational(0));
  };
  auto is_number = [](const std::string& tok) {
    return !tok.empty() && (std::isdigit(static_cast<unsigned char>(tok[0])) || tok[0] == '.');
  };

  // Parse "[sign] coef name [sign coef name ...] [const]" until a sense
  // token; returns terms, constant, and the sense/rhs when requested.
  struct Expr {
    std::vector<std::pair<std::size_t, Rational>> lin;
    std::vector<QuadTerm> quad;
    Rational constant{0};
  };
  auto parse_expr = [&](const std::vector<std::string>& toks, std::size_t& pos,
                        bool allow_quad) -> Expr {
    Expr e;
    Rational sign(1);
    bool in_quad = false;
    while (pos < toks.size()) {
      const std::string& tok = toks[pos];
      if (tok == "+") {
        sign = Rational(1);
        ++pos;
      } else if (tok == "-") {
        sign = -Rational(1);
        ++pos;
      } else if (tok == "[") {
        if (!allow_quad || in_quad) throw FormatError(path + ": unexpected '['");
        in_quad = true;
        ++pos;
      } else if (tok == "]") {
        if (!in_quad) throw FormatError(path + ": unexpected ']'");
        in_quad = false;
        ++pos;
      } else if (tok == "<=" || tok == ">=" || tok == "=") {
        if (in_quad) throw FormatError(path + ": sense token inside quadratic block");
        break;
      } else if (is_number(tok)) {
        double c;
        if (!parse_double(tok, c)) throw FormatError(path + ": bad number '" + tok + "'");
        Rational coef = sign * decimal_rational(c);
        sign = Rational(1);
        ++pos;
        if (pos < toks.size() && !is_number(toks[pos]) && toks[pos] != "+" && toks[pos] != "-" &&
            toks[pos] != "<=" && toks[pos] != ">=" && toks[pos] != "=" && toks[pos] != "]") {
          const std::size_t v1 = ensure_var(toks[pos]);
          ++pos;
          if (in_quad) {
            if (pos >= toks.size() || toks[pos] != "*")
              throw FormatError(path + ": expected '*' in quadratic term");
            ++pos;
            if (pos >= toks.size()) throw FormatError(path + ": truncated quadratic term");
            const std::size_t v2 = ensure_var(toks[pos]);
            ++pos;
            e.quad.push_back({v1, v2, coef});
          } else {
            e.lin.emplace_back(v1, coef);
          }
        } else {
          e.constant += coef;
        }
      } else {
        // Bare variable without an explicit coefficient.
        const std::size_t v1 = ensure_var(tok);
        ++pos;
        if (in_quad) {
          if (pos >= toks.size() || toks[pos] != "*")
            throw FormatError(path + ": expected '*' in quadratic term");
          ++pos;
          const std::size_t v2 = ensure_var(toks[pos]);
          ++pos;
          e.quad.push_back({v1, v2, sign});
        } else {
          e.lin.emplace_back(v1, sign);
        }
        sign = Rational(1);
      }
    }
    if (in_quad) throw FormatError(path + ": unterminated quadratic block");
    return e;
  };

  enum class Section { None, Objective, Constraints, Bounds, Binaries, Generals, Done };
  Section section = Section::None;
  bool saw_objective_line = false;

  for (const std::string& raw : lines) {
    const std::string text = trim(raw);
    if (text.empty()) continue;
    if (text == "Minimize" || text == "Maximize") {
      m.maximize = text == "Maximize";
      section = Section::Objective;
      continue;
    }
    if (text == "Subject To") {
      section = Section::Constraints;
      continue;
    }
    if (text == "Bounds") {
      section = Section::Bounds;
      continue;
    }
    if (text == "Binaries" || text == "Binary") {
      section = Section::Binaries;
      continue;
    }
    if (text == "Generals" || text == "General") {
      section = Section::Generals;
      continue;
    }
    if (text == "End") {
      section = Section::Done;
      continue;
    }

    std::istringstream ss(text);
    std::vector<std::string> toks;
    std::string tok;
    while (ss >> tok) toks.push_back(tok);

    switch (section) {
      case Section::Objective: {
        if (saw_objective_line) throw FormatError(path + ": multi-line objectives unsupported");
        saw_objective_line = true;
        std::size_t pos = 0;
        if (!toks.empty() && toks[0].back() == ':') ++pos;  // "obj:" label
        Expr e = parse_expr(toks, pos, false);
        if (pos != toks.size()) throw FormatError(path + ": trailing tokens in objective");
        m.obj_terms = std::move(e.lin);
        m.obj_constant = e.constant;
        break;
      }
      case Section::Constraints: {
        if (toks.empty() || toks[0].back() != ':')
          throw FormatError(path + ": constraint line without a name: " + text);
        std::string name = toks[0].substr(0, toks[0].size() - 1);
        std::size_t pos = 1;
        Expr e = parse_expr(toks, pos, true);
        if (pos >= toks.size()) throw FormatError(path + ": constraint missing sense: " + text);
        Sense sense = toks[pos] == "<=" ? Sense::Le : toks[pos] == ">=" ? Sense::Ge : Sense::Eq;
        ++pos;
        if (pos >= toks.size()) throw FormatError(path + ": constraint missing rhs: " + text);
        double rhs;
        if (!parse_double(toks[pos], rhs))
          throw FormatError(path + ": bad rhs '" + toks[pos] + "'");
        if (e.quad.empty()) {
          m.constraints.push_back(
              {std::move(name), std::move(e.lin), sense, decimal_rational(rhs) - e.constant});
        } else {
          if (m.quad) throw FormatError(path + ": multiple quadratic constraints");
          QuadCon q;
          q.name = std::move(name);
          q.lin = std::move(e.lin);
          q.quad = std::move(e.quad);
          q.sense = sense;
          q.rhs = decimal_rational(rhs) - e.constant;
          m.quad = std::move(q);
        }
        break;
      }
      case Section::Bounds: {
        if (toks.size() != 5 || toks[1] != "<=" || toks[3] != "<=")
          throw FormatError(path + ": unsupported bounds line: " + text);
        double lb, ub;
        if (!parse_double(toks[0], lb) || !parse_double(toks[4], ub))
          throw FormatError(path + ": bad bounds: " + text);
        ensure_var(toks[2]);
        bounds[toks[2]] = {decimal_rational(lb), decimal_rational(ub)};
        break;
      }
      case Section::Binaries:
        for (const auto& name : toks) binaries.push_back(name);
        break;
      case Section::Generals:
        for (const auto& name : toks) generals.push_back(name);
        break;
      case Section::None:
      case Section::Done:
        throw FormatError(path + ": unexpected content outside sections: " + text);
    }
  }

  for (const auto& name : binaries) {
    auto& v = m.variables[ensure_var(name)];
    v.type = VarType::Binary;
    v.lb = Rational(0);
    v.ub = Rational(1);
  }
  for (const auto& name : generals) m.variables[ensure_var(name)].type = VarType::Integer;
  for (const auto& [name, lu] : bounds) {
    auto& v = m.variables[m.index(name)];
    if (v.type != VarType::Binary) {
      v.lb = lu.first;
      v.ub = lu.second;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Solution files: "variable_name value" lines, '#' comments.
// ---------------------------------------------------------------------------

inline Assignment parse_solution(const ModelSpec& m, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open solution file: " + path);
  Assignment a;
  for (const auto& v : m.variables) a[v.name] = Rational(0);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    std::istringstream ss(text);
    std::string name, value_tok, extra;
    if (!(ss >> name >> value_tok) || (ss >> extra))
      throw FormatError(path + " line " + std::to_string(line_no) +
                        ": expected 'name value', got: " + text);
    auto it = m.var_index.find(name);
    if (it == m.var_index.end())
      throw FormatError(path + " line " + std::to_string(line_no) + ": unknown variable '" +
                        name + "'");
    double value;
    if (!parse_double(value_tok, value))
      throw FormatError(path + " line " + std::to_string(line_no) + ": unparseable value '" +
                        value_tok + "'");
    a[name] = decimal_rational(value);
  }

  for (const auto& v : m.variables) {
    const Rational& val = a[v.name];
    if (val < v.lb - kFeasTol || val > v.ub + kFeasTol)
      throw FormatError(path + ": value of " + v.name + " violates its bounds");
    if (v.type != VarType::Continuous) {
      const Rational nearest(std::llround(to_double(val)));
      if (val - nearest > kFeasTol || nearest - val > kFeasTol)
        throw FormatError(path + ": value of " + v.name + " is not integral");
    }
  }
  return a;
}

inline void write_solution(const ModelSpec& m, const Assignment& a, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << "# model solution: one 'variable value' pair per line\n";
  for (const auto& v : m.variables) {
    auto it = a.find(v.name);
    const Rational val = it == a.end() ? Rational(0) : it->second;
    if (val != Rational(0)) out << v.name << ' ' << format_g17(to_double(val)) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Tree <-> assignment conversion.
// ---------------------------------------------------------------------------

/// Decode a feasible assignment into the tree it describes. Split sets
/// pick up the a-variables above 0.5; a split whose threshold is at or
/// beyond its rule size routes everything left, which is what an inactive
/// node does, so it decodes as inactive.
inline BooleanTree extract_tree(const ModelSpec& m, const Assignment& a) {
  if (!m.has_context)
    throw UsageError("extract_tree needs a model built from data, not one read from an LP file");
  CheckReport report = check_assignment(m, a);
  if (!report.feasible) {
    std::string msg = "assignment is infeasible; first violations:";
    for (std::size_t i = 0; i < report.violations.size() && i < 5; ++i)
      msg += ' ' + report.violations[i];
    throw DataError(msg);
  }
  auto value = [&](const std::string& name) { return to_double(a.at(name)); };

  const TreeTopology topo(m.hp.depth);
  BooleanTree tree(m.hp.depth, m.n_features, m.n_classes);
  for (int t = 1; t < topo.leaf_begin(); ++t) {
    if (value(var_d(t)) <= 0.5) continue;
    SplitRule rule;
    for (std::size_t f = 0; f < m.n_features; ++f)
      if (value(var_a(t, f)) > 0.5) rule.features.push_back(static_cast<int>(f));
    rule.threshold = static_cast<int>(std::llround(value(var_b(t))));
    if (rule.features.empty() || rule.threshold > static_cast<int>(rule.features.size()) - 1)
      continue;  // routes everything left; an inactive node already does that
    tree.rules[t] = std::move(rule);
  }
  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
    if (value(var_l(t)) <= 0.5) continue;
    int label = -1;
    for (int k = 0; k < m.n_classes; ++k) {
      if (value(var_c(t, k)) > 0.5) {
        if (label >= 0)
          throw DataError("leaf " + std::to_string(t) + " carries multiple labels");
        label = k;
      }
    }
    if (label < 0) throw DataError("leaf " + std::to_string(t) + " is on but unlabeled");
    tree.leaf_labels[t] = label;
  }
  BooleanTree canon = canonicalize(tree);
  canon.validate();
  return canon;
}

/// Encode a tree as a complete assignment for the model that build_model
/// constructs from the same data and hyper-parameters. A tree with no
/// active split is encoded through an active-but-empty root rule — the
/// only representation the constraints admit, and one that is feasible
/// exactly when the minimum leaf support is 0.
inline Assignment encode_tree(const BooleanTree& tree, const BinaryDataset& train,
                              const HyperParams& hp, ObjectiveKind obj) {
  tree.validate();
  if (tree.topology.depth != hp.depth)
    throw UsageError("tree depth does not match the hyper-parameters");
  if (tree.n_features != train.n_features)
    throw UsageError("tree and training data disagree on the feature count");
  for (int t = 1; t < tree.topology.leaf_begin(); ++t)
    if (tree.rules[t] &&
        static_cast<int>(tree.rules[t]->features.size()) > hp.max_rule_features)
      throw UsageError("node " + std::to_string(t) + " uses more than " +
                       std::to_string(hp.max_rule_features) + " features");

  const TreeTopology& topo = tree.topology;
  const long long n = static_cast<long long>(train.n);
  Assignment a;

  std::vector<int> d(topo.leaf_begin(), 0);
  for (int t = 1; t < topo.leaf_begin(); ++t) d[t] = tree.rules[t] ? 1 : 0;
  if (tree.count_active() == 0) d[1] = 1;  // empty root rule: all instances go left

  for (int t = 1; t < topo.leaf_begin(); ++t) {
    a[var_d(t)] = Rational(d[t]);
    a[var_b(t)] = Rational(tree.rules[t] ? tree.rules[t]->threshold : 0);
    for (std::size_t f = 0; f < train.n_features; ++f) a[var_a(t, f)] = Rational(0);
    if (tree.rules[t])
      for (int f : tree.rules[t]->features) a[var_a(t, static_cast<std::size_t>(f))] = Rational(1);
  }

  // Leaf activation follows the constraints: on iff some potential parent
  // split is active.
  std::vector<int> l(topo.leaf_end(), 0);
  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
    for (int s : topo.potential_parents(t)) l[t] |= d[s];
    a[var_l(t)] = Rational(l[t]);
  }

  // Instance placement by actual routing.
  std::vector<long long> count_at(topo.leaf_end(), 0);
  std::vector<std::vector<long long>> class_at(topo.leaf_end(),
                                               std::vector<long long>(train.n_classes, 0));
  std::vector<int> landed(train.n);
  for (std::size_t i = 0; i < train.n; ++i) {
    const int leaf = tree.route({train.x.data() + i * train.n_features, train.n_features});
    landed[i] = leaf;
    ++count_at[leaf];
    ++class_at[leaf][train.y[i]];
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
      a[var_z(i, t)] = Rational(t == leaf ? 1 : 0);
  }

  // Labels: the tree's own on reachable leaves; an arbitrary class on
  // leaves that are on but receive nothing (possible only when the
  // minimum support is 0).
  std::vector<int> label(topo.leaf_end(), -1);
  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
    if (l[t]) label[t] = tree.leaf_labels[t] >= 0 ? tree.leaf_labels[t] : 0;
    for (int k = 0; k < train.n_classes; ++k)
      a[var_c(t, k)] = Rational(label[t] == k ? 1 : 0);
  }

  for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
    a[var_N(t)] = Rational(count_at[t]);
    for (int k = 0; k < train.n_classes; ++k) a[var_M(k, t)] = Rational(class_at[t][k]);
  }

  if (obj == ObjectiveKind::Accuracy) {
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
      a[var_e(t)] = Rational(label[t] >= 0 ? count_at[t] - class_at[t][label[t]] : 0);
  } else {
    if (train.n_classes != 2)
      throw UsageError("the " + objective_name(obj) + " objective requires exactly two classes");
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t)
      for (int k = 0; k < 2; ++k)
        a[var_e(t, k)] = Rational(label[t] == k ? count_at[t] - class_at[t][k] : 0);
  }
  if (obj == ObjectiveKind::F1) {
    long long fn = 0, fp = 0;
    for (int t = topo.leaf_begin(); t < topo.leaf_end(); ++t) {
      if (label[t] == 0) fn += count_at[t] - class_at[t][0];
      if (label[t] == 1) fp += count_at[t] - class_at[t][1];
    }
    const long long n_pos = train.positives();
    if (n_pos == 0) throw DataError("the F1 objective needs at least one positive instance");
    a["F_1"] = Rational(2 * (n_pos - fn), 2 * n_pos - fn + fp);
  }
  (void)n;
  return a;
}

}  // namespace booltree
