#pragma once

// Evaluation metrics in exact rational arithmetic. The positive class is
// label 1 throughout (dataset loading offers a remap flag for choosing
// which raw label that is).

#include <cstddef>
#include <vector>

#include "core.hpp"

namespace booltree {

/// Class-by-class prediction counts: counts[true][pred]. The binary
/// accessors read the 2x2 case with label 1 as the positive class.
struct ConfusionMatrix {
  int n_classes = 2;
  std::vector<long long> counts;  // n_classes * n_classes, row = true label

  explicit ConfusionMatrix(int k = 2) : n_classes(k), counts(std::size_t(k) * k, 0) {
    if (k < 2) throw UsageError("confusion matrix needs at least two classes");
  }

  long long& at(int true_label, int predicted) {
    return counts[std::size_t(true_label) * n_classes + predicted];
  }
  long long at(int true_label, int predicted) const {
    return counts[std::size_t(true_label) * n_classes + predicted];
  }

  long long total() const {
    long long s = 0;
    for (long long c : counts) s += c;
    return s;
  }
  long long correct() const {
    long long s = 0;
    for (int k = 0; k < n_classes; ++k) s += at(k, k);
    return s;
  }

  void require_binary() const {
    if (n_classes != 2)
      throw UsageError("TP/FN/FP/TN require a two-class matrix, got " +
                       std::to_string(n_classes) + " classes");
  }
  long long tp() const { require_binary(); return at(1, 1); }
  long long fn() const { require_binary(); return at(1, 0); }
  long long fp() const { require_binary(); return at(0, 1); }
  long long tn() const { require_binary(); return at(0, 0); }
  long long positives() const { return tp() + fn(); }
  long long negatives() const { return tn() + fp(); }
};

inline ConfusionMatrix confusion(const std::vector<int>& y_true,
                                 const std::vector<int>& y_pred, int n_classes = 0) {
  if (y_true.size() != y_pred.size())
    throw UsageError("confusion: label vectors differ in length");
  if (n_classes == 0) {
    n_classes = 2;
    for (std::size_t i = 0; i < y_true.size(); ++i)
      n_classes = std::max({n_classes, y_true[i] + 1, y_pred[i] + 1});
  }
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= n_classes || y_pred[i] < 0 || y_pred[i] >= n_classes)
      throw UsageError("confusion: label out of range at position " + std::to_string(i));
    ++cm.at(y_true[i], y_pred[i]);
  }
  return cm;
}

/// Fraction of instances classified correctly (any class count).
inline Rational accuracy(const ConfusionMatrix& cm) {
  const long long n = cm.total();
  if (n == 0) throw UsageError("accuracy undefined on an empty evaluation set");
  return Rational(cm.correct(), n);
}

/// 1 - (FN/n_pos + FP/n_neg)/2: the mean of the per-class recall rates.
inline Rational balanced_accuracy(const ConfusionMatrix& cm, long long n_pos, long long n_neg) {
  cm.require_binary();
  if (n_pos <= 0 || n_neg <= 0)
    throw UsageError("balanced accuracy needs instances of both classes");
  return Rational(1) - (Rational(cm.fn(), n_pos) + Rational(cm.fp(), n_neg)) / Rational(2);
}
inline Rational balanced_accuracy(const ConfusionMatrix& cm) {
  return balanced_accuracy(cm, cm.positives(), cm.negatives());
}

/// 2(n_pos - FN) / (2 n_pos - FN + FP): harmonic mean of precision and
/// recall, written in terms of the error counts.
inline Rational f1(const ConfusionMatrix& cm, long long n_pos) {
  cm.require_binary();
  if (n_pos <= 0) throw UsageError("F1 needs at least one positive instance");
  return Rational(2 * (n_pos - cm.fn()), 2 * n_pos - cm.fn() + cm.fp());
}
inline Rational f1(const ConfusionMatrix& cm) { return f1(cm, cm.positives()); }

/// Total misclassification cost: cost_fp per false positive plus cost_fn
/// per false negative.
inline Rational mec(const ConfusionMatrix& cm, const Rational& cost_fp,
                    const Rational& cost_fn) {
  cm.require_binary();
  return cost_fp * Rational(cm.fp()) + cost_fn * Rational(cm.fn());
}

/// Which training objective a model optimizes. Accuracy works for any
/// class count; the others are defined for two classes only.
enum class ObjectiveKind { Accuracy, CostSensitive, BalancedAccuracy, F1 };

inline std::string objective_name(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::Accuracy: return "accuracy";
    case ObjectiveKind::CostSensitive: return "cost";
    case ObjectiveKind::BalancedAccuracy: return "balanced";
    case ObjectiveKind::F1: return "f1";
  }
  throw UsageError("unknown objective kind");
}

inline ObjectiveKind parse_objective(const std::string& s) {
  if (s == "accuracy") return ObjectiveKind::Accuracy;
  if (s == "cost") return ObjectiveKind::CostSensitive;
  if (s == "balanced") return ObjectiveKind::BalancedAccuracy;
  if (s == "f1") return ObjectiveKind::F1;
  throw UsageError("unknown objective '" + s + "' (expected accuracy, cost, balanced, or f1)");
}

/// The held-out metric each objective is judged by (model selection uses
/// this, with `metric_lower_is_better` giving the direction).
inline Rational objective_metric(ObjectiveKind k, const ConfusionMatrix& cm,
                                 const Rational& cost_fp = Rational(1),
                                 const Rational& cost_fn = Rational(1)) {
  switch (k) {
    case ObjectiveKind::Accuracy: return accuracy(cm);
    case ObjectiveKind::CostSensitive: return mec(cm, cost_fp, cost_fn);
    case ObjectiveKind::BalancedAccuracy: return balanced_accuracy(cm);
    case ObjectiveKind::F1: return f1(cm);
  }
  throw UsageError("unknown objective kind");
}

inline bool metric_lower_is_better(ObjectiveKind k) {
  return k == ObjectiveKind::CostSensitive;
}

}  // namespace booltree
