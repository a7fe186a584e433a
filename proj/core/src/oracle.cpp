#include "aogplan/oracle.hpp"

#include <functional>
#include <map>

namespace aogplan::world {

namespace {

namespace cls {
const int cup = vocab::object_id("cup");
const int pot = vocab::object_id("pot");
const int dispenser = vocab::object_id("water dispenser");
const int tea_box = vocab::object_id("tea box");
const int bowl = vocab::object_id("bowl");
const int eraser = vocab::object_id("eraser");
const int board = vocab::object_id("board");
const int machine = vocab::object_id("washing machine");
const int teapot = vocab::object_id("teapot");
const int clothes = vocab::object_id("clothes");
const int closet = vocab::object_id("closet");
}  // namespace cls

// Scene fact helpers; all read the first instance in canonical order.
bool filled(const Scene& s, int c) {
  const ObjectInstance* o = s.find(c);
  return o && o->fill == FillState::Filled;
}
bool open(const Scene& s, int c) {
  const ObjectInstance* o = s.find(c);
  return o && o->access == AccessState::Open;
}
bool powered(const Scene& s, int c) {
  const ObjectInstance* o = s.find(c);
  return o && o->power == PowerState::On;
}
// A present dispenser is always usable: the plan turns it on when needed.
bool dispenser_usable(const Scene& s) { return s.has(cls::dispenser); }
bool pot_usable(const Scene& s) { return filled(s, cls::pot); }
bool teapot_usable(const Scene& s) { return filled(s, cls::teapot); }

// An or-rule maps scene facts to a branch index, or nullopt for task-fail.
using OrRule = std::function<std::optional<int>(const Scene&)>;

std::optional<int> pick(bool cond_first) { return cond_first ? 0 : 1; }

const std::map<std::string, OrRule>& rule_table() {
  static const std::map<std::string, OrRule> table = {
      {"prep cup", [](const Scene& s) { return pick(!filled(s, cls::cup)); }},
      {"prep bowl", [](const Scene& s) { return pick(!filled(s, cls::bowl)); }},
      {"tea box state",
       [](const Scene& s) { return pick(open(s, cls::tea_box)); }},
      {"dispenser ready",
       [](const Scene& s) { return pick(powered(s, cls::dispenser)); }},
      {"water source",
       [](const Scene& s) -> std::optional<int> {
         if (dispenser_usable(s)) return 0;
         if (pot_usable(s)) return 1;
         return std::nullopt;
       }},
      {"hot source",
       [](const Scene& s) -> std::optional<int> {
         if (dispenser_usable(s)) return 0;
         if (pot_usable(s)) return 1;
         return std::nullopt;
       }},
      {"water source wide",
       [](const Scene& s) -> std::optional<int> {
         if (dispenser_usable(s)) return 0;
         if (pot_usable(s)) return 1;
         if (teapot_usable(s)) return 2;
         return std::nullopt;
       }},
  };
  return table;
}

// Task preconditions beyond what the or-rules themselves can refuse.
bool preconditions_hold(const Scene& s, int task) {
  switch (task) {
    case 0:  return filled(s, cls::cup) && s.has(cls::bowl);
    case 1:  return s.has(cls::cup) && filled(s, cls::tea_box);
    case 2:  return s.has(cls::cup) && filled(s, cls::tea_box) &&
                    s.has(cls::dispenser);
    case 3:  return s.has(cls::eraser) && s.has(cls::board);
    case 4:  return s.has(cls::cup);
    case 5:  return s.has(cls::cup) && filled(s, cls::pot);
    case 6:  return s.has(cls::cup);
    case 7:  return s.has(cls::cup) && filled(s, cls::pot);
    case 8:  return s.has(cls::cup) && filled(s, cls::teapot);
    case 9:  return s.has(cls::clothes) && s.has(cls::machine);
    case 10: return filled(s, cls::machine);
    case 11: return s.has(cls::clothes) && s.has(cls::closet);
    case 12: return s.has(cls::cup) && filled(s, cls::tea_box) &&
                    filled(s, cls::pot);
    case 13: return s.has(cls::cup) && s.has(cls::dispenser);
    case 14: return s.has(cls::cup) && s.has(cls::dispenser);
    default:
      throw OracleError("no precondition rule for task " +
                        std::to_string(task));
  }
}

OraclePlan fail_plan(grammar::OrSelectionList partial) {
  OraclePlan plan;
  plan.selections = std::move(partial);
  plan.sequence = {AtomicAction::task_fail()};
  plan.failed = true;
  return plan;
}

}  // namespace

bool rules_cover(const grammar::TaskAog& task) {
  for (const auto& node : task.nodes) {
    if (node.kind == grammar::NodeKind::Or &&
        rule_table().find(node.label) == rule_table().end()) {
      return false;
    }
  }
  return true;
}

OraclePlan oracle_plan(const Scene& scene, const grammar::TaskAog& task) {
  if (!rules_cover(task)) {
    throw OracleError("task " + std::to_string(task.task_id) +
                      " has an or-node without rule coverage");
  }
  if (!preconditions_hold(scene, task.task_id)) return fail_plan({});

  grammar::TaskAog graph = task;
  grammar::OrSelectionList selections;
  while (true) {
    auto pending = grammar::or_node_order(graph);
    if (pending.empty()) break;
    const grammar::NodeId or_id = pending.front();
    const OrRule& rule = rule_table().at(graph.node(or_id).label);
    std::optional<int> branch = rule(scene);
    if (!branch) return fail_plan(std::move(selections));
    selections.push_back({or_id, *branch});
    graph = grammar::apply_selection(graph, or_id, *branch);
  }

  OraclePlan plan;
  plan.selections = std::move(selections);
  plan.sequence = grammar::linearize(graph);
  plan.failed = false;
  return plan;
}

}  // namespace aogplan::world
