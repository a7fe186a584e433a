#pragma once

// Shared fixtures: catalog access, hand-built graphs, a random small-AOG
// generator for property tests, and scene builders.

#include <vector>

#include "aogplan/catalog.hpp"
#include "aogplan/grammar.hpp"
#include "aogplan/rng.hpp"
#include "aogplan/scene.hpp"

namespace aogplan::test {

const std::vector<grammar::TaskAog>& shipped_catalog();

// Builds a TaskAog from a nested literal description, assigning preorder ids.
struct TreeSpec {
  grammar::NodeKind kind;
  std::vector<TreeSpec> children;
  AtomicAction action{0, 0};
  std::string label;
};
TreeSpec and_node(std::vector<TreeSpec> children, std::string label = "");
TreeSpec or_node(std::vector<TreeSpec> children, std::string label = "");
TreeSpec leaf(int action, int object);
grammar::TaskAog build_aog(const TreeSpec& root, int task_id = 0);

// Random valid AOG with at most `max_nodes` nodes; used for exhaustive
// sampler/oracle equivalence checks.
grammar::TaskAog random_aog(Rng& rng, int max_nodes);

// Scene helpers.
world::ObjectInstance make_object(int class_id, world::FillState fill,
                                  world::AccessState access,
                                  world::PowerState power, double x, double y,
                                  double w = 0.05, double h = 0.05);
world::ObjectInstance typed_object(int class_id, double x, double y);

}  // namespace aogplan::test
