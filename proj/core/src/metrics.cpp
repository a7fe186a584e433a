#include "aogplan/metrics.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace aogplan::eval {

long long ConfusionMatrix::row_total(int truth) const {
  long long total = 0;
  for (int j = 0; j < n; ++j) total += at(truth, j);
  return total;
}

long long ConfusionMatrix::trace() const {
  long long total = 0;
  for (int i = 0; i < n; ++i) total += at(i, i);
  return total;
}

long long ConfusionMatrix::total() const {
  long long total = 0;
  for (long long c : counts) total += c;
  return total;
}

std::string ConfusionMatrix::to_csv(const char* const* labels) const {
  std::ostringstream os;
  for (int i = 0; i < n; ++i) {
    if (labels) os << labels[i] << ',';
    for (int j = 0; j < n; ++j) {
      os << at(i, j) << (j + 1 < n ? "," : "\n");
    }
  }
  return os.str();
}

SequenceEval score(const std::vector<std::vector<AtomicAction>>& predictions,
                   const std::vector<std::vector<AtomicAction>>& references) {
  if (predictions.size() != references.size()) {
    throw std::invalid_argument("score: prediction/reference count mismatch");
  }
  SequenceEval ev;
  long long action_correct = 0, object_correct = 0, atomic_correct = 0;
  long long sequences_correct = 0;
  std::map<std::pair<int, int>, std::pair<long long, long long>> per_pair;

  for (size_t i = 0; i < references.size(); ++i) {
    const auto& pred = predictions[i];
    const auto& ref = references[i];
    const size_t len = std::max(pred.size(), ref.size());
    bool all_correct = pred.size() == ref.size();
    for (size_t t = 0; t < len; ++t) {
      const AtomicAction p = t < pred.size() ? pred[t] : AtomicAction::stop();
      const AtomicAction r = t < ref.size() ? ref[t] : AtomicAction::stop();
      ev.positions++;
      ev.action_confusion.at(r.action, p.action)++;
      ev.object_confusion.at(r.object, p.object)++;
      const bool a_ok = p.action == r.action;
      const bool o_ok = p.object == r.object;
      if (a_ok) action_correct++;
      if (o_ok) object_correct++;
      auto& [pair_total, pair_correct] = per_pair[{r.action, r.object}];
      pair_total++;
      if (a_ok && o_ok) {
        atomic_correct++;
        pair_correct++;
      } else {
        all_correct = false;
      }
    }
    ev.sequences++;
    if (all_correct) sequences_correct++;
  }

  const double positions = static_cast<double>(std::max<long long>(ev.positions, 1));
  ev.action_accuracy = static_cast<double>(action_correct) / positions;
  ev.object_accuracy = static_cast<double>(object_correct) / positions;
  ev.atomic_accuracy = static_cast<double>(atomic_correct) / positions;
  ev.sequence_accuracy = static_cast<double>(sequences_correct) /
                         static_cast<double>(std::max<long long>(ev.sequences, 1));

  double pair_acc_sum = 0;
  for (const auto& [pair, stats] : per_pair) {
    pair_acc_sum += static_cast<double>(stats.second) /
                    static_cast<double>(stats.first);
  }
  ev.mean_class_atomic_accuracy =
      per_pair.empty() ? 0.0 : pair_acc_sum / static_cast<double>(per_pair.size());

  auto per_class = [](const ConfusionMatrix& cm) {
    std::vector<double> acc(static_cast<size_t>(cm.n), -1.0);
    for (int c = 0; c < cm.n; ++c) {
      const long long total = cm.row_total(c);
      if (total > 0) {
        acc[static_cast<size_t>(c)] =
            static_cast<double>(cm.at(c, c)) / static_cast<double>(total);
      }
    }
    return acc;
  };
  ev.per_class_action = per_class(ev.action_confusion);
  ev.per_class_object = per_class(ev.object_confusion);
  return ev;
}

std::string SequenceEval::to_json() const {
  nlohmann::json doc;
  doc["positions"] = positions;
  doc["sequences"] = sequences;
  doc["action_accuracy"] = action_accuracy;
  doc["object_accuracy"] = object_accuracy;
  doc["atomic_accuracy"] = atomic_accuracy;
  doc["mean_class_atomic_accuracy"] = mean_class_atomic_accuracy;
  doc["sequence_accuracy"] = sequence_accuracy;
  doc["per_class_action"] = per_class_action;
  doc["per_class_object"] = per_class_object;
  return doc.dump();
}

}  // namespace aogplan::eval
