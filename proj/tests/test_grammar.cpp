#include "doctest.h"

#include <algorithm>
#include <set>

#include "aogplan/aog_encoding.hpp"
#include "aogplan/catalog.hpp"
#include "aogplan/grammar.hpp"
#include "test_support.hpp"

using namespace aogplan;
using namespace aogplan::grammar;
using namespace aogplan::test;

namespace {

bool has_violation(const ValidationReport& report, const std::string& needle) {
  return std::any_of(report.violations.begin(), report.violations.end(),
                     [&](const Violation& v) {
                       return v.message.find(needle) != std::string::npos;
                     });
}

NodeId find_by_label(const TaskAog& aog, const std::string& label) {
  for (const auto& node : aog.nodes) {
    if (node.label == label) return node.id;
  }
  return -1;
}

// Independent route through the pruning machinery: expands every or-branch
// combination via apply_selection + linearize.
void expand_all(const TaskAog& graph,
                std::vector<std::vector<AtomicAction>>& out) {
  const auto pending = or_node_order(graph);
  if (pending.empty()) {
    out.push_back(linearize(graph));
    return;
  }
  const NodeId next = pending.front();
  const auto n = graph.node(next).children.size();
  for (size_t b = 0; b < n; ++b) {
    expand_all(apply_selection(graph, next, static_cast<int>(b)), out);
  }
}

}  // namespace

TEST_CASE("validate accepts a single-leaf grammar") {
  const TaskAog aog = build_aog(leaf(0, 0));
  CHECK(validate(aog).ok());
}

TEST_CASE("validate flags or-nodes with too few or too many branches") {
  const TaskAog one_child = build_aog(or_node({leaf(0, 0)}));
  CHECK(has_violation(validate(one_child), "or-node needs >=2 children"));

  const TaskAog four_children =
      build_aog(or_node({leaf(0, 0), leaf(1, 1), leaf(2, 2), leaf(3, 3)}));
  CHECK(has_violation(validate(four_children), "exceeds B=3 branches"));
}

TEST_CASE("validate accepts every shipped task graph") {
  for (const TaskAog& aog : shipped_catalog()) {
    const auto report = validate(aog);
    INFO("task ", aog.task_id, ":\n", report.to_string());
    CHECK(report.ok());
  }
  CHECK(shipped_catalog().size() == vocab::kNumTasks);
}

TEST_CASE("or_node_order visits choice points in preorder") {
  CHECK(or_node_order(build_aog(and_node({leaf(0, 0), leaf(1, 1)}))).empty());

  // root = And(Or_a, And(Or_b)) -> [Or_a, Or_b]
  const TaskAog aog = build_aog(
      and_node({or_node({leaf(0, 0), leaf(1, 1)}),
                and_node({or_node({leaf(2, 2), leaf(3, 3)})})}));
  const auto order = or_node_order(aog);
  REQUIRE(order.size() == 2);
  CHECK(order[0] == 1);  // Or_a directly under the root
  CHECK(order[1] == 5);  // Or_b inside the nested and-node
}

TEST_CASE("pour-a-cup-of-water: source choice comes after the get-cup choice") {
  const TaskAog& aog = shipped_catalog()[6];
  const auto order = or_node_order(aog);
  const NodeId reach = find_by_label(aog, "reach cup");
  const NodeId source = find_by_label(aog, "water source wide");
  REQUIRE(reach >= 0);
  REQUIRE(source >= 0);
  const auto pos = [&](NodeId id) {
    return std::find(order.begin(), order.end(), id) - order.begin();
  };
  CHECK(pos(reach) < pos(source));
}

TEST_CASE("apply_selection keeps the chosen subtree and kills the rest") {
  const TaskAog aog =
      build_aog(or_node({leaf(0, 0), and_node({leaf(1, 1), leaf(2, 2)})}));
  const TaskAog pruned = apply_selection(aog, 0, 0);
  CHECK(pruned.node(0).children == std::vector<NodeId>{1});
  CHECK(pruned.is_alive(1));
  CHECK_FALSE(pruned.is_alive(2));
  CHECK_FALSE(pruned.is_alive(3));
  CHECK_FALSE(pruned.is_alive(4));
  CHECK(linearize(pruned) == std::vector<AtomicAction>{{0, 0}});
}

TEST_CASE("apply_selection rejects bad branches and out-of-order nodes") {
  const TaskAog aog = build_aog(
      and_node({or_node({leaf(0, 0), leaf(1, 1)}),
                or_node({leaf(2, 2), leaf(3, 3)})}));
  CHECK_THROWS_AS(apply_selection(aog, 1, 2), GrammarError);  // branch range
  CHECK_THROWS_AS(apply_selection(aog, 4, 0), GrammarError);  // not next
}

TEST_CASE("resolving every choice point reaches the fixpoint") {
  for (const TaskAog& start : shipped_catalog()) {
    TaskAog graph = start;
    while (true) {
      const auto pending = or_node_order(graph);
      if (pending.empty()) break;
      graph = apply_selection(graph, pending.front(), 0);
    }
    for (const auto& node : graph.nodes) {
      if (!graph.is_alive(node.id) || node.kind != NodeKind::Or) continue;
      CHECK(node.children.size() == 1);
    }
    CHECK_NOTHROW(linearize(graph));
  }
}

TEST_CASE("dispenser branch prunes the pot subtree and yields its sequence") {
  const TaskAog& aog = shipped_catalog()[6];
  TaskAog graph = aog;
  // reach cup -> far, prep cup -> already empty, source -> dispenser,
  // dispenser ready -> already powered
  auto next = [&] { return or_node_order(graph).front(); };
  graph = apply_selection(graph, next(), 1);
  graph = apply_selection(graph, next(), 0);
  const NodeId source = find_by_label(graph, "water source wide");
  graph = apply_selection(graph, source, 0);
  graph = apply_selection(graph, next(), 0);  // nested "dispenser ready"

  const NodeId pot_branch = find_by_label(aog, "fill from the pot");
  CHECK_FALSE(graph.is_alive(pot_branch));

  const auto seq = linearize(graph);
  const int move_to = vocab::action_id("move to");
  const int cup = vocab::object_id("cup");
  REQUIRE(seq.size() == 5);
  CHECK(seq[0] == AtomicAction{move_to, cup});
  CHECK(seq[1] == AtomicAction{vocab::action_id("grasp"), cup});
  CHECK(seq[3].object == vocab::object_id("water dispenser"));
}

TEST_CASE("linearize flattens nested and-nodes left to right") {
  CHECK(linearize(build_aog(leaf(0, 0))) ==
        std::vector<AtomicAction>{{0, 0}});
  const TaskAog aog = build_aog(
      and_node({leaf(0, 0), and_node({leaf(1, 1), leaf(2, 2)})}));
  CHECK(linearize(aog) ==
        std::vector<AtomicAction>{{0, 0}, {1, 1}, {2, 2}});
}

TEST_CASE("linearize refuses unresolved choice points") {
  const TaskAog aog = build_aog(or_node({leaf(0, 0), leaf(1, 1)}));
  CHECK_THROWS_AS(linearize(aog), UnresolvedChoiceError);
}

TEST_CASE("enumerate_sequences basic counts") {
  CHECK(enumerate_sequences(build_aog(and_node({leaf(0, 0), leaf(1, 1)})))
            .size() == 1);
  CHECK(enumerate_sequences(build_aog(or_node({leaf(0, 0), leaf(1, 1)})))
            .size() == 2);

  // And(Or(2 branches), Or(3 branches)) -> every pairing, 6 total.
  const TaskAog aog = build_aog(
      and_node({or_node({leaf(0, 0), leaf(1, 1)}),
                or_node({leaf(2, 2), leaf(3, 3), leaf(4, 4)})}));
  const auto all = enumerate_sequences(aog);
  CHECK(all.size() == 6);
  std::set<std::vector<AtomicAction>> distinct(all.begin(), all.end());
  CHECK(distinct.size() == 6);
}

TEST_CASE("count law holds on every catalog graph") {
  for (const TaskAog& aog : shipped_catalog()) {
    const auto all = enumerate_sequences(aog);
    CHECK(all.size() == count_sequences(aog));
    CHECK(count_sequences(aog) >= 2);  // every task keeps a real choice
  }
}

TEST_CASE("property: selection expansion agrees with enumeration") {
  Rng rng(2024);
  int checked = 0;
  for (int iter = 0; iter < 60; ++iter) {
    const TaskAog aog = random_aog(rng, 10);
    if (aog.node_count() > 12) continue;
    REQUIRE(validate(aog).ok());
    ++checked;

    std::vector<std::vector<AtomicAction>> via_pruning;
    expand_all(aog, via_pruning);
    auto enumerated = enumerate_sequences(aog);
    CHECK(via_pruning.size() == enumerated.size());
    CHECK(enumerated.size() == count_sequences(aog));
    std::sort(via_pruning.begin(), via_pruning.end());
    std::sort(enumerated.begin(), enumerated.end());
    CHECK(via_pruning == enumerated);

    // Uniformly sampled selection walks always land in the enumerated set.
    const std::set<std::vector<AtomicAction>> universe(enumerated.begin(),
                                                       enumerated.end());
    for (int walk = 0; walk < 5; ++walk) {
      TaskAog graph = aog;
      while (true) {
        const auto pending = or_node_order(graph);
        if (pending.empty()) break;
        const auto n = graph.node(pending.front()).children.size();
        graph = apply_selection(graph, pending.front(),
                                static_cast<int>(rng.uniform_int(n)));
      }
      CHECK(universe.count(linearize(graph)) == 1);
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("property: pruning preserves the or-node visit order") {
  Rng rng(77);
  for (int iter = 0; iter < 40; ++iter) {
    const TaskAog aog = random_aog(rng, 14);
    TaskAog graph = aog;
    auto previous = or_node_order(graph);
    while (!previous.empty()) {
      const auto n = graph.node(previous.front()).children.size();
      graph = apply_selection(graph, previous.front(),
                              static_cast<int>(rng.uniform_int(n)));
      std::vector<NodeId> expected;
      for (size_t k = 1; k < previous.size(); ++k) {
        if (graph.is_alive(previous[k])) expected.push_back(previous[k]);
      }
      const auto now = or_node_order(graph);
      CHECK(now == expected);
      previous = now;
    }
  }
}

TEST_CASE("encode_aog writes the 1/2/0 adjacency rule") {
  AogEncodingLayout layout{3};
  const int feat = AogEncodingLayout::node_feat_dim();
  CHECK(feat == 33);
  CHECK(layout.total_dim() == 9 + 3 * 33);

  const auto and_enc =
      encode_aog(build_aog(and_node({leaf(0, 0), leaf(1, 1)})), layout);
  CHECK(and_enc[0] == 0.0);
  CHECK(and_enc[1] == 1.0);
  CHECK(and_enc[2] == 1.0);
  for (size_t k = 3; k < 9; ++k) CHECK(and_enc[k] == 0.0);

  const auto or_enc =
      encode_aog(build_aog(or_node({leaf(0, 0), leaf(1, 1)})), layout);
  CHECK(or_enc[1] == 2.0);
  CHECK(or_enc[2] == 2.0);
}

TEST_CASE("encode_aog node features: type one-hot plus action/object one-hots") {
  AogEncodingLayout layout{3};
  const size_t feat0 = 9;
  const auto enc = encode_aog(build_aog(and_node({leaf(4, 7), leaf(1, 1)})),
                              layout);
  // root: and-node, type slot 0, padded action/object
  CHECK(enc[feat0 + 0] == 1.0);
  for (int k = 3; k < 33; ++k) CHECK(enc[feat0 + static_cast<size_t>(k)] == 0.0);
  // node 1: leaf (action 4, object 7)
  const size_t feat1 = feat0 + 33;
  CHECK(enc[feat1 + 2] == 1.0);
  CHECK(enc[feat1 + 3 + 4] == 1.0);
  CHECK(enc[feat1 + 3 + 15 + 7] == 1.0);
}

TEST_CASE("pruning zeroes exactly the removed slots") {
  AogEncodingLayout layout{5};
  const TaskAog aog = build_aog(
      or_node({leaf(0, 0), and_node({leaf(1, 1), leaf(2, 2)})}));
  const auto before = encode_aog(aog, layout);
  const auto after = encode_aog(apply_selection(aog, 0, 0), layout);

  const int n = layout.n_max;
  const std::set<int> removed = {2, 3, 4};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const size_t idx = static_cast<size_t>(i * n + j);
      if (removed.count(i) || removed.count(j)) {
        CHECK(after[idx] == 0.0);
      } else {
        CHECK(after[idx] == before[idx]);
      }
    }
  }
  for (int node = 0; node < n; ++node) {
    for (int k = 0; k < AogEncodingLayout::node_feat_dim(); ++k) {
      const size_t idx = static_cast<size_t>(n * n) +
                         static_cast<size_t>(node) * 33 + static_cast<size_t>(k);
      if (removed.count(node)) {
        CHECK(after[idx] == 0.0);
      } else {
        CHECK(after[idx] == before[idx]);
      }
    }
  }
}

TEST_CASE("encoding is injective over the catalog") {
  const auto layout = layout_for(shipped_catalog());
  CHECK(layout.n_max == 30);
  std::set<std::vector<double>> encodings;
  for (const TaskAog& aog : shipped_catalog()) {
    encodings.insert(encode_aog(aog, layout));
  }
  CHECK(encodings.size() == shipped_catalog().size());
}

TEST_CASE("encode_aog rejects graphs larger than the layout") {
  AogEncodingLayout layout{2};
  const TaskAog aog = build_aog(and_node({leaf(0, 0), leaf(1, 1)}));
  CHECK_THROWS_AS(encode_aog(aog, layout), GrammarError);
}

TEST_CASE("catalog round-trips through its JSON form") {
  for (const TaskAog& aog : shipped_catalog()) {
    const std::string text = task_aog_to_json(aog);
    CHECK(text.find("\"schema_version\"") != std::string::npos);
  }
  CHECK(catalog_content_hash(shipped_catalog()) != 0);
}
