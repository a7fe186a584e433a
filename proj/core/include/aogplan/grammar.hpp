#pragma once

// And-or task graphs and their parsing-graph semantics.
//
// A TaskAog is a rooted ordered tree: and-nodes decompose a task into
// chronologically ordered sub-tasks, or-nodes pick one of 2..3 alternative
// decompositions, and leaves carry atomic actions. Resolving every or-node
// (pruning the unselected branches) yields a parsing graph whose left-to-right
// leaf traversal is one concrete action sequence.
//
// Node ids are assigned in depth-first preorder from the root, children
// left-to-right. Pruning never renumbers: removed nodes are marked dead and
// keep their ids, so encodings stay positionally comparable across pruning
// steps.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aogplan/vocab.hpp"

namespace aogplan::grammar {

enum class NodeKind : std::uint8_t { And, Or, Leaf };

// Or-nodes never have more than this many branches.
inline constexpr int kMaxBranches = 3;

using NodeId = int;

struct AogNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::Leaf;
  std::vector<NodeId> children;          // empty iff Leaf
  std::optional<AtomicAction> action;    // present iff Leaf
  std::string label;
};

struct TaskAog {
  int task_id = 0;
  NodeId root = 0;
  std::vector<AogNode> nodes;   // indexed by id
  std::vector<std::uint8_t> alive;  // 0 once pruned away; sized like nodes

  const AogNode& node(NodeId id) const { return nodes[static_cast<size_t>(id)]; }
  bool is_alive(NodeId id) const { return alive[static_cast<size_t>(id)] != 0; }
  int node_count() const { return static_cast<int>(nodes.size()); }
};

// One resolved choice point: (or-node id, chosen branch index).
struct OrSelection {
  NodeId or_id = 0;
  int branch = 0;

  bool operator==(const OrSelection&) const = default;
};

using OrSelectionList = std::vector<OrSelection>;

// A fully resolved derivation of one task graph.
struct ParseGraph {
  int task_id = 0;
  OrSelectionList selections;
  std::vector<AtomicAction> sequence;
};

struct Violation {
  NodeId node_id = 0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Checks the structural invariants of a catalog graph: kind/child-count
// rules, connectivity, acyclicity, and preorder id assignment. Report-style;
// never throws.
ValidationReport validate(const TaskAog& aog);

// Unresolved choice points (alive or-nodes with >= 2 children) in depth-first
// preorder, children visited left-to-right. Throws if the graph fails
// validation-level structure (bad child ids).
std::vector<NodeId> or_node_order(const TaskAog& aog);

// Resolves one or-node: keeps only the chosen child subtree, marks every node
// of the unselected subtrees dead. `or_id` must be the first unresolved
// or-node in canonical order and `branch` must index one of its children.
// Surviving nodes keep their ids.
TaskAog apply_selection(const TaskAog& aog, NodeId or_id, int branch);

// Left-to-right leaf traversal of a fully pruned graph. Throws
// UnresolvedChoiceError if any alive or-node still has more than one child.
std::vector<AtomicAction> linearize(const TaskAog& aog);

// Every action sequence the grammar can derive, one per combination of
// or-branch choices. Exponential by nature; intended for desk-scale graphs
// and as the brute-force oracle in tests.
std::vector<std::vector<AtomicAction>> enumerate_sequences(const TaskAog& aog);

// Number of distinct derivations: 1 for a leaf, product over children for an
// and-node, sum over children for an or-node.
std::uint64_t count_sequences(const TaskAog& aog);

struct GrammarError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnresolvedChoiceError : GrammarError {
  using GrammarError::GrammarError;
};

}  // namespace aogplan::grammar
