#pragma once

// Experiment harness. A Bench owns one (config, seed) worth of state —
// catalog, dataset, trained models — and lazily trains each arm exactly once,
// so experiments that share arms (e.g. the augmented planner) reuse the same
// checkpoint. Reports are deterministic byte-for-byte given (config, seed).

#include <map>
#include <memory>
#include <optional>

#include "aogplan/baselines.hpp"
#include "aogplan/experiments_fwd.hpp"
#include "aogplan/metrics.hpp"
#include "aogplan/run_config.hpp"

namespace aogplan::eval {

struct ArmResult {
  std::string name;
  bool covers_unseen = true;     // NN cannot answer unseen tasks
  SequenceEval overall;          // every evaluated sample
  SequenceEval seen;             // tasks with annotated training data
  SequenceEval unseen;           // tasks 12..14
  std::vector<double> per_task_sequence;  // -1 where not evaluated
  std::map<std::string, double> scalars;  // arm-specific extras (sigma, ...)
};

struct ExperimentReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string catalog_hash;
  std::vector<ArmResult> arms;

  const ArmResult* arm(std::string_view name) const;
  std::string to_json(int indent = -1) const;
  std::string to_csv() const;
};

std::optional<ExperimentKind> experiment_from_name(std::string_view name);
std::string_view experiment_name(ExperimentKind kind);

class Bench {
 public:
  explicit Bench(const RunConfig& config);
  ~Bench();

  ExperimentReport run(ExperimentKind kind);
  ExperimentReport run(std::string_view name);  // throws on unknown names

  const RunConfig& config() const { return config_; }
  const std::vector<grammar::TaskAog>& catalog() const { return catalog_; }
  const world::Dataset& dataset() const { return dataset_; }
  const grammar::AogEncodingLayout& encoding_layout() const {
    return enc_layout_;
  }

  // Stage accessors; each trains at most once per bench.
  const planner::AogPlannerParams& aog_model();
  const std::vector<world::Sample>& augmented_set();
  double aog_selection_accuracy();  // teacher-forced, on the test split

  // Named single arms, for callers that need one model rather than a table.
  ArmResult evaluate_arm(const std::string& arm_name);

 private:
  struct Impl;
  RunConfig config_;
  std::vector<grammar::TaskAog> catalog_;
  grammar::AogEncodingLayout enc_layout_;
  world::Dataset dataset_;
  std::unique_ptr<Impl> impl_;
};

// Corruption used by the curriculum experiment: for the top `fraction` of
// generated samples by uncertainty, the last or-node selection is flipped to
// the next branch and the sequence re-derived from the grammar.
std::vector<world::Sample> corrupt_top_uncertain(
    const std::vector<world::Sample>& generated,
    const std::vector<grammar::TaskAog>& catalog, double fraction);

}  // namespace aogplan::eval
