#include "doctest.h"

#include <cmath>
#include <set>

#include "aogplan/experiments.hpp"
#include "aogplan/scene_gen.hpp"
#include "test_support.hpp"

using namespace aogplan;
using namespace aogplan::eval;
using namespace aogplan::test;

namespace {

const world::SceneLayout kSceneLayout;

std::vector<AtomicAction> seq(std::initializer_list<std::pair<int, int>> pairs) {
  std::vector<AtomicAction> out;
  for (const auto& [a, o] : pairs) out.push_back({a, o});
  return out;
}

RunConfig tiny_config(std::uint64_t seed) {
  RunConfig cfg = RunConfig::desk_profile(seed);
  cfg.catalog_dir = AOGPLAN_CATALOG_DIR;
  cfg.dataset.n_train = 24;
  cfg.dataset.n_test = 30;
  cfg.dataset.n_pool = 30;
  cfg.aog_epochs = 2;
  cfg.action_epochs = 2;
  cfg.action_epochs_aug = 2;
  return cfg;
}

}  // namespace

TEST_CASE("score: perfect predictions give accuracy one") {
  const auto r = seq({{0, 0}, {1, 1}, {2, 2}});
  const auto ev = score({r}, {r});
  CHECK(ev.action_accuracy == 1.0);
  CHECK(ev.object_accuracy == 1.0);
  CHECK(ev.atomic_accuracy == 1.0);
  CHECK(ev.sequence_accuracy == 1.0);
  CHECK(ev.mean_class_atomic_accuracy == 1.0);
}

TEST_CASE("score: one wrong action out of four breaks the sequence") {
  const auto ref = seq({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
  auto pred = ref;
  pred[3].action = 5;
  const auto ev = score({pred}, {ref});
  CHECK(ev.action_accuracy == doctest::Approx(0.75));
  CHECK(ev.object_accuracy == 1.0);
  CHECK(ev.atomic_accuracy == doctest::Approx(0.75));
  CHECK(ev.sequence_accuracy == 0.0);
}

TEST_CASE("score: an empty prediction scores zero on every position") {
  const auto ref = seq({{0, 0}, {1, 1}});
  const auto ev = score({{}}, {ref});
  CHECK(ev.positions == 2);
  CHECK(ev.action_accuracy == 0.0);
  CHECK(ev.object_accuracy == 0.0);
  CHECK(ev.atomic_accuracy == 0.0);
  CHECK(ev.sequence_accuracy == 0.0);
}

TEST_CASE("score: length mismatch counts padded positions as wrong") {
  const auto ref = seq({{0, 0}});
  const auto pred = seq({{0, 0}, {1, 1}});
  const auto ev = score({pred}, {ref});
  CHECK(ev.positions == 2);
  CHECK(ev.sequence_accuracy == 0.0);
  CHECK(ev.atomic_accuracy == doctest::Approx(0.5));
}

TEST_CASE("score rejects misaligned prediction/reference lists") {
  CHECK_THROWS_AS(score({{}, {}}, {{}}), std::invalid_argument);
}

TEST_CASE("property: metric ordering and confusion reconciliation") {
  Rng rng(606);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<std::vector<AtomicAction>> preds, refs;
    const int n = 5 + static_cast<int>(rng.uniform_int(25));
    for (int i = 0; i < n; ++i) {
      const auto ref_len = 1 + rng.uniform_int(8);
      const auto pred_len =
          rng.bernoulli(0.7) ? ref_len : 1 + rng.uniform_int(8);
      std::vector<AtomicAction> ref, pred;
      for (size_t k = 0; k < ref_len; ++k) {
        ref.push_back({static_cast<int>(rng.uniform_int(15)),
                       static_cast<int>(rng.uniform_int(15))});
      }
      for (size_t k = 0; k < pred_len; ++k) {
        if (k < ref.size() && rng.bernoulli(0.6)) {
          pred.push_back(ref[k]);
        } else {
          pred.push_back({static_cast<int>(rng.uniform_int(15)),
                          static_cast<int>(rng.uniform_int(15))});
        }
      }
      refs.push_back(std::move(ref));
      preds.push_back(std::move(pred));
    }
    const auto ev = score(preds, refs);
    CHECK(ev.sequence_accuracy <= ev.atomic_accuracy + 1e-12);
    CHECK(ev.atomic_accuracy <=
          std::min(ev.action_accuracy, ev.object_accuracy) + 1e-12);
    const double positions = static_cast<double>(ev.positions);
    CHECK(static_cast<double>(ev.action_confusion.trace()) / positions ==
          doctest::Approx(ev.action_accuracy));
    CHECK(static_cast<double>(ev.object_confusion.trace()) / positions ==
          doctest::Approx(ev.object_accuracy));
    CHECK(ev.action_confusion.total() == ev.positions);
  }
}

TEST_CASE("nearest neighbor replays the closest same-task sequence") {
  Rng rng(17);
  std::vector<world::Sample> train;
  for (int i = 0; i < 10; ++i) {
    world::Sample s;
    s.scene = world::generate_scene(rng, world::Environment::Kitchen);
    s.task_id = i % 3;
    s.sequence = seq({{i % 12, i % 12}});
    train.push_back(std::move(s));
  }
  const NearestNeighborBaseline nn(train, kSceneLayout);

  // A query identical to a training scene returns that sample's sequence.
  CHECK(nn.predict(train[4].scene, train[4].task_id) == train[4].sequence);

  // Duplicating a non-nearest sample leaves the answer unchanged.
  auto train2 = train;
  train2.push_back(train[7]);  // same task as query? task 7%3=1; query task 1
  const NearestNeighborBaseline nn2(train2, kSceneLayout);
  CHECK(nn2.predict(train[4].scene, 1) == nn.predict(train[4].scene, 1));

  CHECK(nn.covers_task(0));
  CHECK_FALSE(nn.covers_task(14));
  CHECK_THROWS_AS(nn.predict(train[0].scene, 14), std::invalid_argument);
}

TEST_CASE("rnn cell uses the plain tanh recurrence") {
  nn::TanhCellParams cell;
  cell.resize(2, 3);
  Rng rng(5);
  for (double& v : cell.Wx.v) v = rng.uniform(-1, 1);
  for (double& v : cell.Wh.v) v = rng.uniform(-1, 1);
  for (double& v : cell.b.v) v = rng.uniform(-1, 1);
  const std::vector<double> x{0.3, -0.8}, h{0.1, -0.2, 0.5};
  const auto out = rnn_cell_step(cell, x, h);
  for (size_t k = 0; k < 3; ++k) {
    double pre = cell.b.v[k];
    for (size_t j = 0; j < 2; ++j) pre += cell.Wx.at(k, j) * x[j];
    for (size_t j = 0; j < 3; ++j) pre += cell.Wh.at(k, j) * h[j];
    CHECK(out[k] == doctest::Approx(std::tanh(pre)).epsilon(1e-12));
  }
}

TEST_CASE("mlp decode halts on stop or at l_max") {
  MlpBaselineParams params;
  params.resize(kSceneLayout.scene_feat_dim(), vocab::kNumTasks, 8);
  Rng rng(6);
  const auto scene = world::generate_scene(rng, world::Environment::Office);

  params.b_a.v[static_cast<size_t>(vocab::kStop)] = 10.0;
  params.b_o.v[static_cast<size_t>(vocab::kStop)] = 10.0;
  CHECK(decode_mlp(scene, 0, params, kSceneLayout).sequence.empty());

  params.b_a.v[static_cast<size_t>(vocab::kStop)] = -10.0;
  params.b_o.v[static_cast<size_t>(vocab::kStop)] = -10.0;
  const auto out = decode_mlp(scene, 0, params, kSceneLayout, 4);
  CHECK(out.sequence.size() == 4);
  CHECK(out.truncated);
}

TEST_CASE("corrupting the most uncertain samples flips their derivation") {
  std::vector<world::Sample> generated;
  Rng rng(8);
  for (int i = 0; i < 10; ++i) {
    world::Sample s;
    s.scene = world::generate_scene(rng, world::Environment::Kitchen);
    s.task_id = 5;
    grammar::TaskAog graph = shipped_catalog()[5];
    while (true) {
      const auto pending = grammar::or_node_order(graph);
      if (pending.empty()) break;
      s.selections.push_back({pending.front(), 0});
      graph = grammar::apply_selection(graph, pending.front(), 0);
    }
    s.sequence = grammar::linearize(graph);
    s.uncertainty = i < 2 ? 0.9 : 0.01;  // two clearly-uncertain samples
    s.origin = world::SampleOrigin::Generated;
    generated.push_back(std::move(s));
  }

  const auto corrupted = corrupt_top_uncertain(generated, shipped_catalog(), 0.2);
  REQUIRE(corrupted.size() == generated.size());
  const auto universe = grammar::enumerate_sequences(shipped_catalog()[5]);
  const std::set<std::vector<AtomicAction>> valid(universe.begin(),
                                                  universe.end());
  int changed = 0;
  for (size_t i = 0; i < corrupted.size(); ++i) {
    CHECK(valid.count(corrupted[i].sequence) == 1);
    if (corrupted[i].sequence != generated[i].sequence) ++changed;
  }
  CHECK(changed == 2);
  CHECK(corrupted[0].sequence != generated[0].sequence);
  CHECK(corrupted[1].sequence != generated[1].sequence);
}

TEST_CASE("experiment names parse and unknown names are rejected") {
  CHECK(experiment_from_name("main") == ExperimentKind::Main);
  CHECK(experiment_from_name("noise") == ExperimentKind::Noise);
  CHECK_FALSE(experiment_from_name("nope").has_value());
}

TEST_CASE("harness: identical config and seed give identical report bytes") {
  const RunConfig cfg = tiny_config(11);
  Bench bench_a(cfg);
  Bench bench_b(cfg);
  const auto report_a = bench_a.run(ExperimentKind::Main);
  const auto report_b = bench_b.run(ExperimentKind::Main);
  CHECK(report_a.to_json() == report_b.to_json());
  CHECK(report_a.to_csv() == report_b.to_csv());
  CHECK(report_a.arms.size() == 5);
  CHECK(report_a.arm("nn") != nullptr);
  CHECK(report_a.arm("action-w-aug") != nullptr);
  CHECK_FALSE(report_a.arm("nn")->covers_unseen);

  Bench bench_c(cfg);
  CHECK_THROWS_AS(bench_c.run("nope"), std::invalid_argument);
}
