#pragma once

// Deterministic ground-truth planner. Resolves every or-node of a task graph
// from scene facts via a rule table keyed by the or-node label, after
// checking the task's preconditions. Unsatisfiable preconditions or an
// unresolvable or-node yield the task-fail plan.

#include <optional>

#include "aogplan/grammar.hpp"
#include "aogplan/scene.hpp"

namespace aogplan::world {

struct OraclePlan {
  grammar::OrSelectionList selections;  // resolved prefix; full when !failed
  std::vector<AtomicAction> sequence;   // the fail singleton when failed
  bool failed = false;
};

// Throws OracleError if the task graph uses an or-node label without a rule.
OraclePlan oracle_plan(const Scene& scene, const grammar::TaskAog& task);

// True when the rule table covers every or-node label of the graph.
bool rules_cover(const grammar::TaskAog& task);

struct OracleError : WorldError {
  using WorldError::WorldError;
};

}  // namespace aogplan::world
