#pragma once

// Sequence evaluation. Comparison is positional: the shorter of prediction
// and reference is padded with (stop, stop) up to the longer length, every
// padded position is scored, and a sequence counts as correct only when the
// lengths match and every atomic action does too. With this convention the
// confusion-matrix traces reconcile exactly with the overall accuracies.

#include <string>
#include <vector>

#include "aogplan/vocab.hpp"

namespace aogplan::eval {

struct ConfusionMatrix {
  int n = 0;
  std::vector<long long> counts;  // row = true class, col = predicted

  explicit ConfusionMatrix(int classes = 0)
      : n(classes),
        counts(static_cast<size_t>(classes) * static_cast<size_t>(classes), 0) {}
  long long& at(int truth, int pred) {
    return counts[static_cast<size_t>(truth) * static_cast<size_t>(n) +
                  static_cast<size_t>(pred)];
  }
  long long at(int truth, int pred) const {
    return counts[static_cast<size_t>(truth) * static_cast<size_t>(n) +
                  static_cast<size_t>(pred)];
  }
  long long row_total(int truth) const;
  long long trace() const;
  long long total() const;
  std::string to_csv(const char* const* labels = nullptr) const;
};

struct SequenceEval {
  long long positions = 0;   // padded positions scored
  long long sequences = 0;

  double action_accuracy = 0;
  double object_accuracy = 0;
  double atomic_accuracy = 0;
  double mean_class_atomic_accuracy = 0;
  double sequence_accuracy = 0;

  std::vector<double> per_class_action;  // indexed by action class; -1 if unseen
  std::vector<double> per_class_object;
  ConfusionMatrix action_confusion{vocab::kNumActionClasses};
  ConfusionMatrix object_confusion{vocab::kNumObjectClasses};

  std::string to_json() const;
};

// Aligned lists: predictions[i] is scored against references[i]. Throws on
// length-mismatched lists.
SequenceEval score(const std::vector<std::vector<AtomicAction>>& predictions,
                   const std::vector<std::vector<AtomicAction>>& references);

}  // namespace aogplan::eval
