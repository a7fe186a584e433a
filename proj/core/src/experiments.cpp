#include "aogplan/experiments.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "aogplan/noise.hpp"
#include "json.hpp"

namespace aogplan::eval {

using planner::ActionPlannerParams;
using planner::AogPlannerParams;
using world::Sample;

namespace {

constexpr int kFirstUnseenTask = 12;

const char* kArmNn = "nn";
const char* kArmMlp = "mlp";
const char* kArmRnn = "rnn";
const char* kArmNoAug = "action-wo-aug";
const char* kArmAug = "action-w-aug";
const char* kArmSelfAug = "action-self-aug";
const char* kArmAogDirect = "aog-direct";
const char* kArmNoClClean = "action-w-aug-nocl";
const char* kArmClCorrupt = "action-w-aug-corrupt";
const char* kArmNoClCorrupt = "action-w-aug-corrupt-nocl";
const char* kArmJoint = "action-joint-w-aug";
const char* kArmNoise0 = "noise-clean";
const char* kArmNoise10 = "noise-10";
const char* kArmNoise20 = "noise-20";

}  // namespace

std::optional<ExperimentKind> experiment_from_name(std::string_view name) {
  if (name == "main") return ExperimentKind::Main;
  if (name == "generalization") return ExperimentKind::Generalization;
  if (name == "self-aug") return ExperimentKind::SelfAug;
  if (name == "curriculum") return ExperimentKind::Curriculum;
  if (name == "joint-head") return ExperimentKind::JointHead;
  if (name == "noise") return ExperimentKind::Noise;
  return std::nullopt;
}

std::string_view experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Main: return "main";
    case ExperimentKind::Generalization: return "generalization";
    case ExperimentKind::SelfAug: return "self-aug";
    case ExperimentKind::Curriculum: return "curriculum";
    case ExperimentKind::JointHead: return "joint-head";
    case ExperimentKind::Noise: return "noise";
  }
  return "unknown";
}

const ArmResult* ExperimentReport::arm(std::string_view name) const {
  for (const ArmResult& a : arms) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::string ExperimentReport::to_json(int indent) const {
  nlohmann::json doc;
  doc["experiment"] = experiment;
  doc["seed"] = seed;
  doc["config_hash"] = config_hash;
  doc["catalog_hash"] = catalog_hash;
  nlohmann::json arms_doc = nlohmann::json::array();
  for (const ArmResult& a : arms) {
    nlohmann::json ja;
    ja["name"] = a.name;
    ja["covers_unseen"] = a.covers_unseen;
    ja["overall"] = nlohmann::json::parse(a.overall.to_json());
    ja["seen"] = nlohmann::json::parse(a.seen.to_json());
    if (a.covers_unseen) {
      ja["unseen"] = nlohmann::json::parse(a.unseen.to_json());
    }
    ja["per_task_sequence"] = a.per_task_sequence;
    ja["scalars"] = a.scalars;
    arms_doc.push_back(std::move(ja));
  }
  doc["arms"] = std::move(arms_doc);
  return indent >= 0 ? doc.dump(indent) : doc.dump();
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "arm,sequence_overall,sequence_seen,sequence_unseen,action,object,"
        "atomic,mean_class_atomic";
  for (int t = 0; t < vocab::kNumTasks; ++t) os << ",task" << t;
  os << "\n";
  os.setf(std::ios::fixed);
  os.precision(4);
  for (const ArmResult& a : arms) {
    os << a.name << ',' << a.overall.sequence_accuracy << ','
       << a.seen.sequence_accuracy << ',';
    if (a.covers_unseen) {
      os << a.unseen.sequence_accuracy;
    }
    os << ',' << a.overall.action_accuracy << ',' << a.overall.object_accuracy
       << ',' << a.overall.atomic_accuracy << ','
       << a.overall.mean_class_atomic_accuracy;
    for (double acc : a.per_task_sequence) os << ',' << acc;
    os << "\n";
  }
  return os.str();
}

std::vector<Sample> corrupt_top_uncertain(
    const std::vector<Sample>& generated,
    const std::vector<grammar::TaskAog>& catalog, double fraction) {
  std::vector<std::size_t> order(generated.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return generated[a].uncertainty > generated[b].uncertainty;
                   });
  const auto n_corrupt = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(generated.size())));

  std::vector<Sample> out = generated;
  for (std::size_t k = 0; k < n_corrupt; ++k) {
    Sample& s = out[order[k]];
    if (s.selections.empty()) continue;
    grammar::OrSelectionList flipped = s.selections;
    grammar::OrSelection& last = flipped.back();
    const grammar::TaskAog& aog = catalog[static_cast<std::size_t>(s.task_id)];
    const int n_children =
        static_cast<int>(aog.node(last.or_id).children.size());
    last.branch = (last.branch + 1) % n_children;

    grammar::TaskAog graph = aog;
    for (const auto& sel : flipped) {
      graph = grammar::apply_selection(graph, sel.or_id, sel.branch);
    }
    s.selections = flipped;
    s.sequence = grammar::linearize(graph);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct Bench::Impl {
  Bench& bench;

  std::optional<AogPlannerParams> aog;
  std::optional<std::vector<Sample>> augmented;
  std::optional<std::vector<Sample>> augmented_corrupt;
  std::optional<std::vector<Sample>> self_augmented;
  std::map<std::string, ActionPlannerParams> actions;
  std::optional<NearestNeighborBaseline> nn;
  std::optional<MlpBaselineParams> mlp;
  std::optional<RnnBaselineParams> rnn;
  std::map<std::string, double> noise_sigma;   // arm -> calibrated sigma
  std::map<std::string, double> noise_ratio;   // arm -> measured ratio

  explicit Impl(Bench& b) : bench(b) {}

  const RunConfig& cfg() const { return bench.config_; }
  const world::Dataset& ds() const { return bench.dataset_; }
  const world::SceneLayout& scene_layout() const {
    return bench.config_.dataset.layout;
  }

  planner::ActionTrainOptions action_options(bool augmented_run) const {
    planner::ActionTrainOptions o;
    o.sgd = cfg().sgd;
    o.epochs = augmented_run ? cfg().action_epochs_aug : cfg().action_epochs;
    o.seed = cfg().seed;
    o.curriculum = cfg().curriculum;
    o.schedule = cfg().schedule;
    return o;
  }

  const AogPlannerParams& aog_model() {
    if (!aog) {
      planner::AogTrainOptions o;
      o.sgd = cfg().sgd;
      o.epochs = cfg().aog_epochs;
      o.seed = cfg().seed;
      aog = planner::train_aog_planner(
          ds().train, bench.catalog_, bench.enc_layout_, scene_layout(),
          cfg().aog_dims(scene_layout().scene_feat_dim(),
                         bench.enc_layout_.total_dim()),
          o);
    }
    return *aog;
  }

  const std::vector<Sample>& augmented_set() {
    if (!augmented) {
      augmented = planner::augment(ds().pool, bench.catalog_, aog_model(),
                                   bench.enc_layout_, scene_layout(),
                                   ds().train);
    }
    return *augmented;
  }

  const std::vector<Sample>& corrupted_set() {
    if (!augmented_corrupt) {
      augmented_corrupt =
          corrupt_top_uncertain(augmented_set(), bench.catalog_, 0.2);
    }
    return *augmented_corrupt;
  }

  // Pseudo-labels from an annotated-only action planner (no grammar).
  const std::vector<Sample>& self_augmented_set() {
    if (!self_augmented) {
      const ActionPlannerParams& base = action(kArmNoAug);
      std::vector<Sample> pseudo;
      pseudo.reserve(ds().pool.size());
      for (const world::PoolEntry& entry : ds().pool) {
        planner::DecodeResult dec = planner::decode(
            entry.scene, entry.task_id, base, scene_layout(), cfg().l_max);
        Sample s;
        s.scene = entry.scene;
        s.task_id = entry.task_id;
        s.sequence = dec.sequence;
        s.uncertainty = dec.mean_entropy;
        s.origin = world::SampleOrigin::Generated;
        pseudo.push_back(std::move(s));
      }
      self_augmented = std::move(pseudo);
    }
    return *self_augmented;
  }

  std::vector<Sample> noisy_annotated(double sigma) {
    std::vector<Sample> noisy = ds().train;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      Rng rng = Rng::derive(cfg().seed, "noise-train", i);
      const auto f = world::encode_scene(noisy[i].scene, scene_layout());
      noisy[i].feature_override =
          world::perturb_features(f, sigma, rng, scene_layout()).features;
    }
    return noisy;
  }

  double sigma_for(const std::string& arm, double target) {
    auto it = noise_sigma.find(arm);
    if (it != noise_sigma.end()) return it->second;
    std::vector<world::Scene> scenes;
    scenes.reserve(ds().test.size());
    for (const Sample& s : ds().test) scenes.push_back(s.scene);
    const double sigma = target <= 0.0
                             ? 0.0
                             : world::calibrate_sigma(scenes, target,
                                                      scene_layout(), cfg().seed);
    noise_sigma[arm] = sigma;
    noise_ratio[arm] = world::measure_negative_ratio(scenes, sigma,
                                                     scene_layout(), cfg().seed);
    return sigma;
  }

  const ActionPlannerParams& action(const std::string& arm) {
    auto it = actions.find(arm);
    if (it != actions.end()) return it->second;

    ActionPlannerParams trained = [&]() -> ActionPlannerParams {
      const auto dims = cfg().action_dims(scene_layout().scene_feat_dim());
      if (arm == kArmNoAug) {
        return planner::train_action_planner(ds().train, {}, scene_layout(),
                                             dims, action_options(false));
      }
      if (arm == kArmAug) {
        return planner::train_action_planner(ds().train, augmented_set(),
                                             scene_layout(), dims,
                                             action_options(true));
      }
      if (arm == kArmSelfAug) {
        return planner::train_action_planner(ds().train, self_augmented_set(),
                                             scene_layout(), dims,
                                             action_options(true));
      }
      if (arm == kArmNoClClean) {
        auto o = action_options(true);
        o.curriculum = false;
        return planner::train_action_planner(ds().train, augmented_set(),
                                             scene_layout(), dims, o);
      }
      if (arm == kArmClCorrupt) {
        return planner::train_action_planner(ds().train, corrupted_set(),
                                             scene_layout(), dims,
                                             action_options(true));
      }
      if (arm == kArmNoClCorrupt) {
        auto o = action_options(true);
        o.curriculum = false;
        return planner::train_action_planner(ds().train, corrupted_set(),
                                             scene_layout(), dims, o);
      }
      if (arm == kArmJoint) {
        return planner::train_action_planner_joint(
            ds().train, augmented_set(), bench.catalog_, scene_layout(), dims,
            action_options(true));
      }
      if (arm == kArmNoise0) {
        return planner::train_action_planner(ds().train, {}, scene_layout(),
                                             dims, action_options(false));
      }
      if (arm == kArmNoise10 || arm == kArmNoise20) {
        const double target = arm == kArmNoise10 ? 0.10 : 0.20;
        const double sigma = sigma_for(arm, target);
        return planner::train_action_planner(noisy_annotated(sigma), {},
                                             scene_layout(), dims,
                                             action_options(false));
      }
      throw std::invalid_argument("unknown action arm: " + arm);
    }();
    return actions.emplace(arm, std::move(trained)).first->second;
  }

  const NearestNeighborBaseline& nn_model() {
    if (!nn) nn.emplace(ds().train, scene_layout());
    return *nn;
  }

  const MlpBaselineParams& mlp_model() {
    if (!mlp) {
      mlp = train_mlp_baseline(ds().train, scene_layout(),
                               cfg().action_hidden(), action_options(false));
    }
    return *mlp;
  }

  const RnnBaselineParams& rnn_model() {
    if (!rnn) {
      rnn = train_rnn_baseline(ds().train, scene_layout(),
                               cfg().action_dims(scene_layout().scene_feat_dim()),
                               action_options(false));
    }
    return *rnn;
  }

  // Evaluates a predictor over the test split. The predictor may decline a
  // sample (e.g. NN on unseen tasks) by returning nullopt.
  using Predictor =
      std::function<std::optional<std::vector<AtomicAction>>(const Sample&, std::size_t)>;

  ArmResult evaluate(const std::string& name, const Predictor& predict) {
    ArmResult result;
    result.name = name;

    std::vector<std::vector<AtomicAction>> preds_all, refs_all;
    std::vector<std::vector<AtomicAction>> preds_seen, refs_seen;
    std::vector<std::vector<AtomicAction>> preds_unseen, refs_unseen;
    std::vector<std::vector<AtomicAction>> preds_task[vocab::kNumTasks],
        refs_task[vocab::kNumTasks];
    bool declined_unseen = false;

    for (std::size_t i = 0; i < ds().test.size(); ++i) {
      const Sample& s = ds().test[i];
      auto pred = predict(s, i);
      if (!pred) {
        declined_unseen = declined_unseen || s.task_id >= kFirstUnseenTask;
        continue;
      }
      preds_all.push_back(*pred);
      refs_all.push_back(s.sequence);
      if (s.task_id < kFirstUnseenTask) {
        preds_seen.push_back(*pred);
        refs_seen.push_back(s.sequence);
      } else {
        preds_unseen.push_back(*pred);
        refs_unseen.push_back(s.sequence);
      }
      preds_task[s.task_id].push_back(std::move(*pred));
      refs_task[s.task_id].push_back(s.sequence);
    }

    result.overall = score(preds_all, refs_all);
    result.seen = score(preds_seen, refs_seen);
    result.covers_unseen = !preds_unseen.empty() && !declined_unseen;
    if (result.covers_unseen) result.unseen = score(preds_unseen, refs_unseen);
    result.per_task_sequence.assign(vocab::kNumTasks, -1.0);
    for (int t = 0; t < vocab::kNumTasks; ++t) {
      if (!refs_task[t].empty()) {
        result.per_task_sequence[static_cast<std::size_t>(t)] =
            score(preds_task[t], refs_task[t]).sequence_accuracy;
      }
    }
    return result;
  }

  ArmResult evaluate_action_arm(const std::string& arm) {
    const ActionPlannerParams& params = action(arm);
    if (arm == kArmNoise10 || arm == kArmNoise20) {
      const double sigma = noise_sigma.at(arm);
      ArmResult r = evaluate(arm, [&](const Sample& s, std::size_t i)
                                      -> std::optional<std::vector<AtomicAction>> {
        Rng rng = Rng::derive(cfg().seed, "noise-test", i);
        const auto f = world::encode_scene(s.scene, scene_layout());
        const auto noisy = world::perturb_features(f, sigma, rng, scene_layout());
        return planner::decode_features(noisy.features, s.task_id, params,
                                        cfg().l_max)
            .sequence;
      });
      r.scalars["sigma"] = sigma;
      r.scalars["negative_ratio"] = noise_ratio.at(arm);
      return r;
    }
    return evaluate(arm, [&](const Sample& s, std::size_t)
                             -> std::optional<std::vector<AtomicAction>> {
      return planner::decode(s.scene, s.task_id, params, scene_layout(),
                             cfg().l_max)
          .sequence;
    });
  }

  ArmResult evaluate_arm(const std::string& arm) {
    if (arm == kArmNn) {
      const NearestNeighborBaseline& model = nn_model();
      return evaluate(arm, [&](const Sample& s, std::size_t)
                               -> std::optional<std::vector<AtomicAction>> {
        if (!model.covers_task(s.task_id)) return std::nullopt;
        return model.predict(s.scene, s.task_id);
      });
    }
    if (arm == kArmMlp) {
      const MlpBaselineParams& model = mlp_model();
      return evaluate(arm, [&](const Sample& s, std::size_t)
                               -> std::optional<std::vector<AtomicAction>> {
        return decode_mlp(s.scene, s.task_id, model, scene_layout(),
                          cfg().l_max)
            .sequence;
      });
    }
    if (arm == kArmRnn) {
      const RnnBaselineParams& model = rnn_model();
      return evaluate(arm, [&](const Sample& s, std::size_t)
                               -> std::optional<std::vector<AtomicAction>> {
        return decode_rnn(s.scene, s.task_id, model, scene_layout(),
                          cfg().l_max)
            .sequence;
      });
    }
    if (arm == kArmAogDirect) {
      const AogPlannerParams& model = aog_model();
      return evaluate(arm, [&](const Sample& s, std::size_t)
                               -> std::optional<std::vector<AtomicAction>> {
        return planner::generate_sample(
                   s.scene,
                   bench.catalog_[static_cast<std::size_t>(s.task_id)], model,
                   bench.enc_layout_, scene_layout())
            .sequence;
      });
    }
    return evaluate_action_arm(arm);
  }
};

Bench::Bench(const RunConfig& config)
    : config_(config),
      catalog_(grammar::load_catalog(config.catalog_dir)),
      enc_layout_(grammar::layout_for(catalog_)),
      dataset_(world::build_dataset(catalog_, config.dataset)),
      impl_(std::make_unique<Impl>(*this)) {}

Bench::~Bench() = default;

const planner::AogPlannerParams& Bench::aog_model() {
  return impl_->aog_model();
}

const std::vector<Sample>& Bench::augmented_set() {
  return impl_->augmented_set();
}

double Bench::aog_selection_accuracy() {
  return planner::selection_accuracy(dataset_.test, catalog_,
                                     impl_->aog_model(), enc_layout_,
                                     config_.dataset.layout);
}

ArmResult Bench::evaluate_arm(const std::string& arm_name) {
  return impl_->evaluate_arm(arm_name);
}

ExperimentReport Bench::run(ExperimentKind kind) {
  ExperimentReport report;
  report.experiment = std::string(experiment_name(kind));
  report.seed = config_.seed;
  report.config_hash = config_.config_hash_hex();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(dataset_.catalog_hash));
  report.catalog_hash = buf;

  std::vector<std::string> arm_names;
  switch (kind) {
    case ExperimentKind::Main:
      arm_names = {kArmNn, kArmMlp, kArmRnn, kArmNoAug, kArmAug};
      break;
    case ExperimentKind::Generalization:
      arm_names = {kArmSelfAug, kArmNoAug, kArmAug};
      break;
    case ExperimentKind::SelfAug:
      arm_names = {kArmAogDirect, kArmSelfAug, kArmNoAug, kArmAug};
      break;
    case ExperimentKind::Curriculum:
      arm_names = {kArmAug, kArmNoClClean, kArmClCorrupt, kArmNoClCorrupt};
      break;
    case ExperimentKind::JointHead:
      arm_names = {kArmJoint, kArmAug};
      break;
    case ExperimentKind::Noise:
      arm_names = {kArmNoise0, kArmNoise10, kArmNoise20};
      break;
  }
  for (const std::string& name : arm_names) {
    report.arms.push_back(impl_->evaluate_arm(name));
  }
  return report;
}

ExperimentReport Bench::run(std::string_view name) {
  auto kind = experiment_from_name(name);
  if (!kind) {
    throw std::invalid_argument("unknown experiment: " + std::string(name));
  }
  return run(*kind);
}

}  // namespace aogplan::eval
