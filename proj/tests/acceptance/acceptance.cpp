// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Training-heavy criteria share per-seed Bench instances so every
// model is trained exactly once per seed.

#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "aogplan/experiments.hpp"
#include "aogplan/noise.hpp"
#include "aogplan/oracle.hpp"
#include "aogplan/scene_gen.hpp"
#include "../gradcheck.hpp"
#include "../test_support.hpp"

namespace fs = std::filesystem;
using namespace aogplan;
using namespace aogplan::test;

namespace {

constexpr std::uint64_t kSeeds[3] = {7, 8, 9};

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[accept] criterion %2d: %s  %s\n", criterion,
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  CHECK_MESSAGE(pass, "criterion ", criterion, ": ", detail);
}

RunConfig acceptance_config(std::uint64_t seed) {
  RunConfig cfg = RunConfig::desk_profile(seed);
  cfg.catalog_dir = AOGPLAN_CATALOG_DIR;
  return cfg;
}

// One Bench per seed, shared across criteria 5-9 and 11.
eval::Bench& bench_for(std::uint64_t seed) {
  static std::map<std::uint64_t, std::unique_ptr<eval::Bench>> benches;
  auto it = benches.find(seed);
  if (it == benches.end()) {
    it = benches.emplace(seed, std::make_unique<eval::Bench>(
                                   acceptance_config(seed)))
             .first;
  }
  return *it->second;
}

const eval::ArmResult& arm_for(std::uint64_t seed, const std::string& name) {
  static std::map<std::pair<std::uint64_t, std::string>, eval::ArmResult> cache;
  const auto key = std::make_pair(seed, name);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, bench_for(seed).evaluate_arm(name)).first;
  }
  return it->second;
}

double mean_over_seeds(const std::string& arm,
                       double (*metric)(const eval::ArmResult&)) {
  double sum = 0;
  for (std::uint64_t seed : kSeeds) sum += metric(arm_for(seed, arm));
  return sum / 3.0;
}

double overall_seq(const eval::ArmResult& a) {
  return a.overall.sequence_accuracy;
}
double seen_seq(const eval::ArmResult& a) { return a.seen.sequence_accuracy; }
double unseen_seq(const eval::ArmResult& a) {
  return a.unseen.sequence_accuracy;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

}  // namespace

TEST_CASE("criterion 1: grammar oracle equivalence on the full catalog") {
  bool pass = true;
  std::string detail;
  Rng rng(1001);
  for (const auto& aog : shipped_catalog()) {
    auto enumerated = grammar::enumerate_sequences(aog);
    if (enumerated.size() != grammar::count_sequences(aog)) {
      pass = false;
      detail = fmt("count law broken on task %d", aog.task_id);
      break;
    }
    const std::set<std::vector<AtomicAction>> universe(enumerated.begin(),
                                                       enumerated.end());
    // exhaustive: every branch combination, plus uniform sampled walks
    std::vector<std::vector<AtomicAction>> expanded;
    std::function<void(const grammar::TaskAog&)> expand =
        [&](const grammar::TaskAog& g) {
          const auto pending = grammar::or_node_order(g);
          if (pending.empty()) {
            expanded.push_back(grammar::linearize(g));
            return;
          }
          const auto n = g.node(pending.front()).children.size();
          for (size_t b = 0; b < n; ++b) {
            expand(grammar::apply_selection(g, pending.front(),
                                            static_cast<int>(b)));
          }
        };
    expand(aog);
    for (const auto& seq : expanded) {
      if (!universe.count(seq)) {
        pass = false;
        detail = fmt("unreachable sequence on task %d", aog.task_id);
      }
    }
    if (expanded.size() != universe.size()) pass = false;
    for (int walk = 0; walk < 50; ++walk) {
      grammar::TaskAog g = aog;
      while (true) {
        const auto pending = grammar::or_node_order(g);
        if (pending.empty()) break;
        const auto n = g.node(pending.front()).children.size();
        g = grammar::apply_selection(g, pending.front(),
                                     static_cast<int>(rng.uniform_int(n)));
      }
      if (!universe.count(grammar::linearize(g))) pass = false;
    }
  }
  if (pass) detail = "all 15 graphs: sampled selections in enumeration, counts match";
  report(1, pass, detail);
}

TEST_CASE("criterion 2: encoding golden files and pruning locality") {
  auto serialize = [](const std::vector<double>& values) {
    std::string out;
    char line[64];
    for (double v : values) {
      std::snprintf(line, sizeof line, "%.17g\n", v);
      out += line;
    }
    return out;
  };
  const fs::path dir = AOGPLAN_GOLDEN_DIR;

  const grammar::TaskAog and_root =
      build_aog(and_node({leaf(0, 0), leaf(1, 1)}));
  const grammar::TaskAog or_root = build_aog(or_node({leaf(4, 3), leaf(7, 9)}));
  const grammar::TaskAog nested = build_aog(
      and_node({or_node({leaf(3, 5), and_node({leaf(6, 0), leaf(10, 7)})}),
                leaf(8, 11)}));

  bool pass = true;
  std::string detail = "all four golden encodings match byte-for-byte";
  auto check_golden = [&](const grammar::TaskAog& g, int n_max,
                          const char* file) {
    const auto enc = grammar::encode_aog(g, grammar::AogEncodingLayout{n_max});
    if (serialize(enc) != read_file(dir / file)) {
      pass = false;
      detail = fmt("mismatch in %s", file);
    }
  };
  check_golden(and_root, 3, "encode_and_root.txt");
  check_golden(or_root, 3, "encode_or_root.txt");
  check_golden(nested, 7, "encode_nested_full.txt");
  check_golden(grammar::apply_selection(nested, 1, 0), 7,
               "encode_nested_pruned.txt");

  // Pruning zeroes exactly the removed slots.
  const grammar::AogEncodingLayout layout{7};
  const auto before = grammar::encode_aog(nested, layout);
  const auto after =
      grammar::encode_aog(grammar::apply_selection(nested, 1, 0), layout);
  const std::set<int> removed = {3, 4, 5};
  for (int i = 0; i < 7 && pass; ++i) {
    for (int j = 0; j < 7; ++j) {
      const size_t idx = static_cast<size_t>(i * 7 + j);
      const bool should_zero = removed.count(i) || removed.count(j);
      if (should_zero ? after[idx] != 0.0 : after[idx] != before[idx]) {
        pass = false;
        detail = "pruning touched an unexpected adjacency slot";
      }
    }
  }
  for (int node = 0; node < 7 && pass; ++node) {
    for (int k = 0; k < grammar::AogEncodingLayout::node_feat_dim(); ++k) {
      const size_t idx = 49 + static_cast<size_t>(node) * 33 +
                         static_cast<size_t>(k);
      const bool should_zero = removed.count(node) > 0;
      if (should_zero ? after[idx] != 0.0 : after[idx] != before[idx]) {
        pass = false;
        detail = "pruning touched an unexpected feature slot";
      }
    }
  }
  report(2, pass, detail);
}

TEST_CASE("criterion 3: analytic gradients match finite differences") {
  const auto enc_layout = grammar::layout_for(shipped_catalog());
  const world::SceneLayout scene_layout;
  double worst = 0.0;

  // or-selector topology: task 6 gives 3 unrolled steps
  world::Sample aog_sample;
  {
    Rng rng(42);
    aog_sample.scene = world::generate_scene(rng, world::Environment::Kitchen);
    aog_sample.task_id = 6;
    grammar::TaskAog g = shipped_catalog()[6];
    int t = 0;
    while (true) {
      const auto pending = grammar::or_node_order(g);
      if (pending.empty()) break;
      const auto n = g.node(pending.front()).children.size();
      const int branch = static_cast<int>(t % n);
      aog_sample.selections.push_back({pending.front(), branch});
      g = grammar::apply_selection(g, pending.front(), branch);
      ++t;
    }
    aog_sample.sequence = grammar::linearize(g);
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    planner::AogPlannerDims dims;
    dims.scene_dim = scene_layout.scene_feat_dim();
    dims.aog_dim = enc_layout.total_dim();
    dims.embed = 8;
    dims.hidden = 16;
    auto params = planner::AogPlannerParams::sized_like(dims);
    Rng rng(3000 + seed);
    params.init(rng);
    auto grads = planner::AogPlannerParams::sized_like(dims);
    planner::teacher_forced_loss({aog_sample}, shipped_catalog(), enc_layout,
                                 scene_layout, params, &grads);
    auto loss_fn = [&]() {
      return planner::teacher_forced_loss({aog_sample}, shipped_catalog(),
                                          enc_layout, scene_layout, params);
    };
    worst = std::max(worst, finite_difference_check(loss_fn, params.registry(),
                                                    grads.registry())
                                .max_rel_error);
  }

  // action topology: 2 actions + stop = 3 unrolled steps
  world::Sample act_sample = aog_sample;
  act_sample.sequence.resize(2);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    planner::ActionPlannerDims dims;
    dims.scene_dim = scene_layout.scene_feat_dim();
    dims.embed = 8;
    dims.hidden = 16;
    auto params = planner::ActionPlannerParams::sized_like(dims);
    Rng rng(4000 + seed);
    params.init(rng);
    auto grads = planner::ActionPlannerParams::sized_like(dims);
    planner::teacher_forced_loss({act_sample}, scene_layout, params, &grads);
    auto loss_fn = [&]() {
      return planner::teacher_forced_loss({act_sample}, scene_layout, params);
    };
    worst = std::max(worst, finite_difference_check(loss_fn, params.registry(),
                                                    grads.registry())
                                .max_rel_error);
  }
  report(3, worst < 1e-4,
         fmt("max relative error %.3g (tolerance 1e-4), both topologies, 5 "
             "seeds",
             worst));
}

TEST_CASE("criterion 4: single-sample overfit and exact free-running replay") {
  const auto enc_layout = grammar::layout_for(shipped_catalog());
  const world::SceneLayout scene_layout;

  world::Sample sample;
  {
    Rng rng(51);
    while (true) {
      sample.scene = world::generate_scene(rng, world::Environment::Kitchen);
      const auto plan = world::oracle_plan(sample.scene, shipped_catalog()[6]);
      if (plan.failed) continue;
      sample.task_id = 6;
      sample.selections = plan.selections;
      sample.sequence = plan.sequence;
      break;
    }
  }

  planner::AogPlannerDims adims;
  adims.scene_dim = scene_layout.scene_feat_dim();
  adims.aog_dim = enc_layout.total_dim();
  adims.embed = 16;
  adims.hidden = 16;
  planner::AogTrainOptions aopts;
  aopts.epochs = 500;
  aopts.seed = 5;
  const auto aog_params =
      planner::train_aog_planner({sample}, shipped_catalog(), enc_layout,
                                 scene_layout, adims, aopts);
  const double aog_nll = planner::selection_nll(
      {sample}, shipped_catalog(), aog_params, enc_layout, scene_layout);
  const auto regen = planner::generate_sample(
      sample.scene, shipped_catalog()[6], aog_params, enc_layout, scene_layout);
  const bool aog_ok = aog_nll < 0.01 && regen.selections == sample.selections;

  planner::ActionPlannerDims pdims;
  pdims.scene_dim = scene_layout.scene_feat_dim();
  pdims.embed = 16;
  pdims.hidden = 16;
  planner::ActionTrainOptions popts;
  popts.epochs = 500;
  popts.seed = 5;
  const auto act_params = planner::train_action_planner(
      {sample}, {}, scene_layout, pdims, popts);
  const double act_nll =
      planner::teacher_forced_loss({sample}, scene_layout, act_params) /
      static_cast<double>(sample.sequence.size() + 1);
  const auto decoded =
      planner::decode(sample.scene, 6, act_params, scene_layout);
  const bool act_ok = act_nll < 0.01 && decoded.sequence == sample.sequence;

  report(4, aog_ok && act_ok,
         fmt("or-selector NLL %.4f replay %s; action NLL/step %.4f replay %s",
             aog_nll, regen.selections == sample.selections ? "exact" : "WRONG",
             act_nll, decoded.sequence == sample.sequence ? "exact" : "WRONG"));
}

TEST_CASE("criterion 5: or-selection accuracy at least 95% held out") {
  const double acc = bench_for(kSeeds[0]).aog_selection_accuracy();
  report(5, acc >= 0.95, fmt("teacher-forced selection accuracy %.4f on the "
                             "983-sample test split (threshold 0.95)",
                             acc));
}

TEST_CASE("criterion 6: augmentation beats annotated-only by 2+ points") {
  const double with_aug = mean_over_seeds("action-w-aug", overall_seq);
  const double without = mean_over_seeds("action-wo-aug", overall_seq);
  report(6, with_aug >= without + 0.02,
         fmt("w/ aug %.4f vs w/o aug %.4f (3-seed mean, need +0.02)", with_aug,
             without));
}

TEST_CASE("criterion 7: unseen-task generalization gap of 20+ points") {
  const double with_aug = mean_over_seeds("action-w-aug", unseen_seq);
  const double without = mean_over_seeds("action-wo-aug", unseen_seq);
  const double self_aug = mean_over_seeds("action-self-aug", unseen_seq);
  const bool pass = with_aug >= without + 0.20 && with_aug > self_aug;
  report(7, pass,
         fmt("unseen tasks: w/ aug %.4f, w/o aug %.4f (need +0.20), self-aug "
             "%.4f (must trail)",
             with_aug, without, self_aug));
}

TEST_CASE("criterion 8: curriculum non-inferior clean, better under corruption") {
  const double cl_clean = mean_over_seeds("action-w-aug", overall_seq);
  const double nocl_clean = mean_over_seeds("action-w-aug-nocl", overall_seq);
  const double cl_corrupt = mean_over_seeds("action-w-aug-corrupt", overall_seq);
  const double nocl_corrupt =
      mean_over_seeds("action-w-aug-corrupt-nocl", overall_seq);
  const bool pass =
      cl_clean >= nocl_clean - 0.005 && cl_corrupt >= nocl_corrupt + 0.01;
  report(8, pass,
         fmt("clean: CL %.4f vs noCL %.4f (>=-0.005); corrupted: CL %.4f vs "
             "noCL %.4f (>=+0.01)",
             cl_clean, nocl_clean, cl_corrupt, nocl_corrupt));
}

TEST_CASE("criterion 9: baseline ordering NN < MLP <= RNN <= Action-LSTM") {
  const double nn = mean_over_seeds("nn", seen_seq);
  const double mlp = mean_over_seeds("mlp", seen_seq);
  const double rnn = mean_over_seeds("rnn", seen_seq);
  const double ours = mean_over_seeds("action-w-aug", seen_seq);
  const bool pass =
      mlp >= nn + 0.05 && rnn >= mlp - 0.005 && ours >= rnn - 0.005;
  report(9, pass,
         fmt("NN %.4f + 0.05 <= MLP %.4f; RNN %.4f >= MLP - 0.005; ours %.4f "
             ">= RNN - 0.005 (seen tasks, 3-seed mean)",
             nn, mlp, rnn, ours));
}

TEST_CASE("criterion 10: metric algebra on randomized pairs") {
  Rng rng(1010);
  bool pass = true;
  for (int pair = 0; pair < 1000 && pass; ++pair) {
    std::vector<AtomicAction> ref, pred;
    const auto ref_len = 1 + rng.uniform_int(8);
    const auto pred_len = rng.bernoulli(0.6) ? ref_len : 1 + rng.uniform_int(8);
    for (size_t k = 0; k < ref_len; ++k) {
      ref.push_back({static_cast<int>(rng.uniform_int(15)),
                     static_cast<int>(rng.uniform_int(15))});
    }
    for (size_t k = 0; k < pred_len; ++k) {
      if (k < ref.size() && rng.bernoulli(0.5)) {
        pred.push_back(ref[k]);
      } else {
        pred.push_back({static_cast<int>(rng.uniform_int(15)),
                        static_cast<int>(rng.uniform_int(15))});
      }
    }
    const auto ev = eval::score({pred}, {ref});
    if (ev.sequence_accuracy > ev.atomic_accuracy + 1e-12) pass = false;
    if (ev.atomic_accuracy >
        std::min(ev.action_accuracy, ev.object_accuracy) + 1e-12) {
      pass = false;
    }
    const double positions = static_cast<double>(ev.positions);
    if (std::abs(static_cast<double>(ev.action_confusion.trace()) / positions -
                 ev.action_accuracy) > 1e-12) {
      pass = false;
    }
    if (std::abs(static_cast<double>(ev.object_confusion.trace()) / positions -
                 ev.object_accuracy) > 1e-12) {
      pass = false;
    }
  }
  report(10, pass,
         "sequence <= atomic <= min(action, object) and trace/total "
         "reconciliation on 1000 randomized pairs");
}

TEST_CASE("criterion 11: noise degrades accuracy monotonically") {
  const auto& clean = arm_for(kSeeds[0], "noise-clean");
  const auto& n10 = arm_for(kSeeds[0], "noise-10");
  const auto& n20 = arm_for(kSeeds[0], "noise-20");
  const double r10 = n10.scalars.at("negative_ratio");
  const double r20 = n20.scalars.at("negative_ratio");
  const bool calibrated =
      std::abs(r10 - 0.10) <= 0.02 && std::abs(r20 - 0.20) <= 0.02;
  const bool ordered =
      n10.overall.sequence_accuracy > n20.overall.sequence_accuracy &&
      n10.overall.sequence_accuracy < clean.overall.sequence_accuracy &&
      n20.overall.sequence_accuracy < clean.overall.sequence_accuracy;
  report(11, calibrated && ordered,
         fmt("clean %.4f > 10%% noise %.4f > 20%% noise %.4f; ratios %.3f/%.3f",
             clean.overall.sequence_accuracy, n10.overall.sequence_accuracy,
             n20.overall.sequence_accuracy, r10, r20));
}

TEST_CASE("criterion 12: experiment main --seed 7 is byte-reproducible") {
  const fs::path root = fs::temp_directory_path() / "aogplan_accept_det";
  fs::remove_all(root);
  fs::create_directories(root);

  // Reduced budgets keep the double run short; determinism is what is under
  // test and the command line is the real one.
  RunConfig cfg = acceptance_config(7);
  cfg.dataset.n_train = 48;
  cfg.dataset.n_test = 60;
  cfg.dataset.n_pool = 60;
  cfg.aog_epochs = 8;
  cfg.action_epochs = 8;
  cfg.action_epochs_aug = 8;
  const fs::path config_path = root / "config.json";
  cfg.save(config_path);

  auto run_once = [&](const char* tag) {
    const fs::path out = root / tag;
    const std::string cmd = std::string(AOGPLAN_CLI_PATH) + " --config " +
                            config_path.string() + " --seed 7 --out " +
                            out.string() + " experiment main > " +
                            (root / (std::string(tag) + ".log")).string() +
                            " 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    return read_file(out / "reports" / "main.json") +
           read_file(out / "reports" / "main.csv");
  };
  const std::string first = run_once("a");
  const std::string second = run_once("b");
  const bool pass = !first.empty() && first == second;
  report(12, pass, fmt("two CLI runs produced %zu identical report bytes",
                       first.size()));
  fs::remove_all(root);
}
