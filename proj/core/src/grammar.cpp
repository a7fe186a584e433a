#include "aogplan/grammar.hpp"

#include <algorithm>
#include <sstream>

namespace aogplan::grammar {

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << "node " << v.node_id << ": " << v.message << "\n";
  }
  return os.str();
}

namespace {

bool in_range(const TaskAog& aog, NodeId id) {
  return id >= 0 && id < aog.node_count();
}

// Preorder walk over alive nodes; returns false if a child id is invalid.
template <typename Fn>
bool preorder(const TaskAog& aog, NodeId at, Fn&& fn) {
  if (!in_range(aog, at) || !aog.is_alive(at)) return false;
  fn(at);
  for (NodeId child : aog.node(at).children) {
    if (!in_range(aog, child)) return false;
    if (!aog.is_alive(child)) continue;
    if (!preorder(aog, child, fn)) return false;
  }
  return true;
}

void mark_subtree_dead(TaskAog& aog, NodeId at) {
  aog.alive[static_cast<size_t>(at)] = 0;
  for (NodeId child : aog.node(at).children) {
    mark_subtree_dead(aog, child);
  }
}

}  // namespace

ValidationReport validate(const TaskAog& aog) {
  ValidationReport report;
  auto flag = [&](NodeId id, std::string msg) {
    report.violations.push_back({id, std::move(msg)});
  };

  if (aog.nodes.empty()) {
    flag(-1, "graph has no nodes");
    return report;
  }
  if (aog.alive.size() != aog.nodes.size()) {
    flag(-1, "alive mask size does not match node count");
    return report;
  }
  if (!in_range(aog, aog.root)) {
    flag(aog.root, "root id out of range");
    return report;
  }

  for (int i = 0; i < aog.node_count(); ++i) {
    const AogNode& n = aog.nodes[static_cast<size_t>(i)];
    if (n.id != i) flag(i, "node id does not match its index");
    switch (n.kind) {
      case NodeKind::Leaf:
        if (!n.children.empty()) flag(i, "leaf node has children");
        if (!n.action) flag(i, "leaf node carries no atomic action");
        break;
      case NodeKind::And:
        if (n.action) flag(i, "and-node carries an atomic action");
        if (n.children.empty()) flag(i, "and-node needs >=1 child");
        break;
      case NodeKind::Or:
        if (n.action) flag(i, "or-node carries an atomic action");
        if (n.children.size() < 2) flag(i, "or-node needs >=2 children");
        if (n.children.size() > static_cast<size_t>(kMaxBranches)) {
          flag(i, "exceeds B=" + std::to_string(kMaxBranches) + " branches");
        }
        break;
    }
    for (NodeId child : n.children) {
      if (!in_range(aog, child)) {
        flag(i, "child id out of range: " + std::to_string(child));
      }
    }
  }
  if (!report.ok()) return report;

  // Reachability, single-parent and preorder numbering in one pass.
  std::vector<int> parent_count(aog.nodes.size(), 0);
  std::vector<NodeId> visit_order;
  bool walk_ok = preorder(aog, aog.root, [&](NodeId id) {
    visit_order.push_back(id);
    for (NodeId child : aog.node(id).children) {
      parent_count[static_cast<size_t>(child)]++;
    }
  });
  if (!walk_ok) {
    flag(aog.root, "walk failed: invalid child reference");
    return report;
  }
  if (visit_order.size() != aog.nodes.size()) {
    flag(aog.root, "not all nodes reachable from root");
  }
  for (size_t i = 0; i < parent_count.size(); ++i) {
    if (static_cast<NodeId>(i) == aog.root) {
      if (parent_count[i] != 0) flag(static_cast<NodeId>(i), "root has a parent");
    } else if (parent_count[i] > 1) {
      flag(static_cast<NodeId>(i), "node has multiple parents (not a tree)");
    }
  }
  for (size_t i = 0; i < visit_order.size(); ++i) {
    if (visit_order[i] != static_cast<NodeId>(i)) {
      flag(visit_order[i], "node ids are not in depth-first preorder");
      break;
    }
  }
  if (aog.root != 0) flag(aog.root, "root must carry id 0");
  return report;
}

std::vector<NodeId> or_node_order(const TaskAog& aog) {
  std::vector<NodeId> order;
  bool ok = preorder(aog, aog.root, [&](NodeId id) {
    const AogNode& n = aog.node(id);
    size_t alive_children = 0;
    for (NodeId child : n.children) {
      if (in_range(aog, child) && aog.is_alive(child)) ++alive_children;
    }
    if (n.kind == NodeKind::Or && alive_children >= 2) order.push_back(id);
  });
  if (!ok) throw GrammarError("or_node_order: graph has invalid structure");
  return order;
}

TaskAog apply_selection(const TaskAog& aog, NodeId or_id, int branch) {
  std::vector<NodeId> pending = or_node_order(aog);
  if (pending.empty() || pending.front() != or_id) {
    throw GrammarError("apply_selection: node " + std::to_string(or_id) +
                       " is not the next unresolved or-node");
  }
  const AogNode& n = aog.node(or_id);
  if (branch < 0 || branch >= static_cast<int>(n.children.size())) {
    throw GrammarError("apply_selection: branch " + std::to_string(branch) +
                       " out of range for node " + std::to_string(or_id));
  }

  TaskAog pruned = aog;
  AogNode& target = pruned.nodes[static_cast<size_t>(or_id)];
  NodeId keep = target.children[static_cast<size_t>(branch)];
  for (NodeId child : target.children) {
    if (child != keep) mark_subtree_dead(pruned, child);
  }
  target.children = {keep};
  return pruned;
}

namespace {

void collect_leaves(const TaskAog& aog, NodeId at,
                    std::vector<AtomicAction>& out) {
  const AogNode& n = aog.node(at);
  if (n.kind == NodeKind::Leaf) {
    out.push_back(*n.action);
    return;
  }
  int alive_children = 0;
  for (NodeId child : n.children) {
    if (aog.is_alive(child)) ++alive_children;
  }
  if (n.kind == NodeKind::Or && alive_children > 1) {
    throw UnresolvedChoiceError("unresolved choice at node " +
                                std::to_string(at));
  }
  for (NodeId child : n.children) {
    if (aog.is_alive(child)) collect_leaves(aog, child, out);
  }
}

std::vector<std::vector<AtomicAction>> enumerate_at(const TaskAog& aog,
                                                    NodeId at) {
  const AogNode& n = aog.node(at);
  switch (n.kind) {
    case NodeKind::Leaf:
      return {{*n.action}};
    case NodeKind::Or: {
      std::vector<std::vector<AtomicAction>> all;
      for (NodeId child : n.children) {
        if (!aog.is_alive(child)) continue;
        auto sub = enumerate_at(aog, child);
        all.insert(all.end(), std::make_move_iterator(sub.begin()),
                   std::make_move_iterator(sub.end()));
      }
      return all;
    }
    case NodeKind::And: {
      std::vector<std::vector<AtomicAction>> acc = {{}};
      for (NodeId child : n.children) {
        if (!aog.is_alive(child)) continue;
        auto sub = enumerate_at(aog, child);
        std::vector<std::vector<AtomicAction>> next;
        next.reserve(acc.size() * sub.size());
        for (const auto& prefix : acc) {
          for (const auto& suffix : sub) {
            auto seq = prefix;
            seq.insert(seq.end(), suffix.begin(), suffix.end());
            next.push_back(std::move(seq));
          }
        }
        acc = std::move(next);
      }
      return acc;
    }
  }
  throw GrammarError("enumerate: unknown node kind");
}

std::uint64_t count_at(const TaskAog& aog, NodeId at) {
  const AogNode& n = aog.node(at);
  switch (n.kind) {
    case NodeKind::Leaf:
      return 1;
    case NodeKind::Or: {
      std::uint64_t total = 0;
      for (NodeId child : n.children) {
        if (aog.is_alive(child)) total += count_at(aog, child);
      }
      return total;
    }
    case NodeKind::And: {
      std::uint64_t total = 1;
      for (NodeId child : n.children) {
        if (aog.is_alive(child)) total *= count_at(aog, child);
      }
      return total;
    }
  }
  return 0;
}

}  // namespace

std::vector<AtomicAction> linearize(const TaskAog& aog) {
  std::vector<AtomicAction> out;
  collect_leaves(aog, aog.root, out);
  return out;
}

std::vector<std::vector<AtomicAction>> enumerate_sequences(const TaskAog& aog) {
  return enumerate_at(aog, aog.root);
}

std::uint64_t count_sequences(const TaskAog& aog) {
  return count_at(aog, aog.root);
}

}  // namespace aogplan::grammar
