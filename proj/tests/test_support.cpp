#include "test_support.hpp"

namespace aogplan::test {

const std::vector<grammar::TaskAog>& shipped_catalog() {
  static const auto catalog = grammar::load_catalog(AOGPLAN_CATALOG_DIR);
  return catalog;
}

TreeSpec and_node(std::vector<TreeSpec> children, std::string label) {
  TreeSpec s;
  s.kind = grammar::NodeKind::And;
  s.children = std::move(children);
  s.label = std::move(label);
  return s;
}

TreeSpec or_node(std::vector<TreeSpec> children, std::string label) {
  TreeSpec s;
  s.kind = grammar::NodeKind::Or;
  s.children = std::move(children);
  s.label = std::move(label);
  return s;
}

TreeSpec leaf(int action, int object) {
  TreeSpec s;
  s.kind = grammar::NodeKind::Leaf;
  s.action = {action, object};
  return s;
}

namespace {

void flatten(const TreeSpec& spec, grammar::TaskAog& aog) {
  const auto id = static_cast<grammar::NodeId>(aog.nodes.size());
  grammar::AogNode node;
  node.id = id;
  node.kind = spec.kind;
  node.label = spec.label;
  if (spec.kind == grammar::NodeKind::Leaf) node.action = spec.action;
  aog.nodes.push_back(std::move(node));
  for (const TreeSpec& child : spec.children) {
    const auto child_id = static_cast<grammar::NodeId>(aog.nodes.size());
    aog.nodes[static_cast<size_t>(id)].children.push_back(child_id);
    flatten(child, aog);
  }
}

}  // namespace

grammar::TaskAog build_aog(const TreeSpec& root, int task_id) {
  grammar::TaskAog aog;
  aog.task_id = task_id;
  aog.root = 0;
  flatten(root, aog);
  aog.alive.assign(aog.nodes.size(), 1);
  return aog;
}

namespace {

// Recursive generator: leaves get random atomic actions; internal nodes get
// 1..3 (and) or 2..3 (or) children within the node budget.
TreeSpec random_tree(Rng& rng, int& budget, int depth) {
  budget -= 1;
  const bool must_leaf = budget < 3 || depth >= 4;
  const double roll = rng.uniform();
  if (must_leaf || roll < 0.4) {
    return leaf(static_cast<int>(rng.uniform_int(vocab::kNumPrimitiveActions)),
                static_cast<int>(rng.uniform_int(vocab::kNumObjects)));
  }
  const bool make_or = roll < 0.7;
  const int min_children = make_or ? 2 : 1;
  const int max_children = 3;
  int n_children =
      min_children +
      static_cast<int>(rng.uniform_int(
          static_cast<std::uint64_t>(max_children - min_children + 1)));
  n_children = std::min(n_children, std::max(min_children, budget));
  std::vector<TreeSpec> children;
  for (int i = 0; i < n_children; ++i) {
    children.push_back(random_tree(rng, budget, depth + 1));
  }
  return make_or ? or_node(std::move(children)) : and_node(std::move(children));
}

}  // namespace

grammar::TaskAog random_aog(Rng& rng, int max_nodes) {
  int budget = max_nodes;
  TreeSpec root = random_tree(rng, budget, 0);
  return build_aog(root);
}

world::ObjectInstance make_object(int class_id, world::FillState fill,
                                  world::AccessState access,
                                  world::PowerState power, double x, double y,
                                  double w, double h) {
  world::ObjectInstance obj;
  obj.class_id = class_id;
  obj.fill = fill;
  obj.access = access;
  obj.power = power;
  obj.bbox = {x, y, w, h};
  return obj;
}

world::ObjectInstance typed_object(int class_id, double x, double y) {
  const auto& schema = world::class_schema(class_id);
  return make_object(
      class_id,
      schema.has_fill ? world::FillState::Empty : world::FillState::NotApplicable,
      schema.has_access ? world::AccessState::Closed
                        : world::AccessState::NotApplicable,
      schema.has_power ? world::PowerState::Off : world::PowerState::NotApplicable,
      x, y);
}

}  // namespace aogplan::test
