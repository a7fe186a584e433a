#include "aogplan/action_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "aogplan/nn/ops.hpp"
#include "json.hpp"
#include "planner_common.hpp"

namespace aogplan::planner {

using world::Sample;

AtomicVocab AtomicVocab::from_catalog(
    const std::vector<grammar::TaskAog>& catalog) {
  AtomicVocab v;
  auto add = [&](const AtomicAction& a) {
    if (std::find(v.pairs.begin(), v.pairs.end(), a) == v.pairs.end()) {
      v.pairs.push_back(a);
    }
  };
  for (const auto& aog : catalog) {
    for (const auto& node : aog.nodes) {
      if (node.action) add(*node.action);
    }
  }
  add(AtomicAction::start());
  add(AtomicAction::stop());
  add(AtomicAction::task_fail());
  return v;
}

int AtomicVocab::id_of(const AtomicAction& a) const {
  auto it = std::find(pairs.begin(), pairs.end(), a);
  return it == pairs.end() ? -1 : static_cast<int>(it - pairs.begin());
}

void ActionPlannerParams::resize(const ActionPlannerDims& d) {
  dims = d;
  const auto e = static_cast<std::size_t>(d.embed);
  const auto h = static_cast<std::size_t>(d.hidden);
  W_fI.resize({e, static_cast<std::size_t>(d.scene_dim)});
  W_fT.resize({e, static_cast<std::size_t>(d.task_dim)});
  W_hf.resize({h, 2 * e});
  W_emb.resize({e, static_cast<std::size_t>(kPairEncodingDim)});
  lstm.resize(e, h);
  if (d.joint()) {
    W_jh.resize({static_cast<std::size_t>(d.joint_vocab), h});
    b_j.resize({static_cast<std::size_t>(d.joint_vocab)});
    W_ah.resize({0, 0});
    b_a.resize({0});
    W_oh.resize({0, 0});
    b_o.resize({0});
  } else {
    W_ah.resize({static_cast<std::size_t>(vocab::kNumActionClasses), h});
    b_a.resize({static_cast<std::size_t>(vocab::kNumActionClasses)});
    W_oh.resize({static_cast<std::size_t>(vocab::kNumObjectClasses), h});
    b_o.resize({static_cast<std::size_t>(vocab::kNumObjectClasses)});
    W_jh.resize({0, 0});
    b_j.resize({0});
  }
}

void ActionPlannerParams::init(Rng& rng) {
  nn::init_uniform_fan(rng, W_fI, W_fI.cols(), W_fI.rows());
  nn::init_uniform_fan(rng, W_fT, W_fT.cols(), W_fT.rows());
  nn::init_uniform_fan(rng, W_hf, W_hf.cols(), W_hf.rows());
  nn::init_uniform_fan(rng, W_emb, W_emb.cols(), W_emb.rows());
  nn::init_uniform_fan(rng, lstm.Wx, lstm.Wx.cols(), lstm.hidden_dim());
  nn::init_uniform_fan(rng, lstm.Wh, lstm.Wh.cols(), lstm.hidden_dim());
  lstm.b.fill(0.0);
  const std::size_t h = lstm.hidden_dim();
  for (std::size_t k = h; k < 2 * h; ++k) lstm.b.v[k] = 1.0;
  if (dims.joint()) {
    nn::init_uniform_fan(rng, W_jh, W_jh.cols(), W_jh.rows());
    b_j.fill(0.0);
  } else {
    nn::init_uniform_fan(rng, W_ah, W_ah.cols(), W_ah.rows());
    b_a.fill(0.0);
    nn::init_uniform_fan(rng, W_oh, W_oh.cols(), W_oh.rows());
    b_o.fill(0.0);
  }
}

std::vector<nn::ParamRef> ActionPlannerParams::registry() {
  std::vector<nn::ParamRef> refs = {
      {"W_fI", &W_fI},       {"W_fT", &W_fT}, {"W_hf", &W_hf},
      {"W_emb", &W_emb},     {"lstm.Wx", &lstm.Wx},
      {"lstm.Wh", &lstm.Wh}, {"lstm.b", &lstm.b},
  };
  if (dims.joint()) {
    refs.push_back({"W_jh", &W_jh});
    refs.push_back({"b_j", &b_j});
  } else {
    refs.push_back({"W_ah", &W_ah});
    refs.push_back({"b_a", &b_a});
    refs.push_back({"W_oh", &W_oh});
    refs.push_back({"b_o", &b_o});
  }
  return refs;
}

std::string ActionPlannerParams::meta_json() const {
  nlohmann::json doc;
  doc["model"] = "action_planner";
  doc["scene_dim"] = dims.scene_dim;
  doc["task_dim"] = dims.task_dim;
  doc["embed"] = dims.embed;
  doc["hidden"] = dims.hidden;
  doc["joint_vocab"] = dims.joint_vocab;
  if (dims.joint()) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const AtomicAction& a : joint_pairs.pairs) {
      pairs.push_back({a.action, a.object});
    }
    doc["joint_pairs"] = std::move(pairs);
  }
  return doc.dump();
}

void save_action_planner(const std::filesystem::path& path,
                         ActionPlannerParams& params) {
  nn::save_checkpoint(path, params.registry(), params.meta_json());
}

ActionPlannerParams load_action_planner(const std::filesystem::path& path) {
  const auto meta = nlohmann::json::parse(nn::read_checkpoint_meta(path));
  if (meta.value("model", "") != "action_planner") {
    throw nn::CheckpointError(path.string() + ": not an action planner");
  }
  ActionPlannerDims dims;
  dims.scene_dim = meta.at("scene_dim").get<int>();
  dims.task_dim = meta.at("task_dim").get<int>();
  dims.embed = meta.at("embed").get<int>();
  dims.hidden = meta.at("hidden").get<int>();
  dims.joint_vocab = meta.at("joint_vocab").get<int>();
  ActionPlannerParams params = ActionPlannerParams::sized_like(dims);
  if (dims.joint()) {
    for (const auto& jp : meta.at("joint_pairs")) {
      params.joint_pairs.pairs.push_back(
          {jp.at(0).get<int>(), jp.at(1).get<int>()});
    }
  }
  nn::load_checkpoint(path, params.registry());
  return params;
}

namespace {

void encode_pair(const AtomicAction& a, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  out[static_cast<std::size_t>(a.action)] = 1.0;
  out[static_cast<std::size_t>(vocab::kNumActionClasses + a.object)] = 1.0;
}

// x = W_emb enc where enc is the 2-hot pair encoding.
void embed_pair(const nn::Tensor& W_emb, const AtomicAction& a,
                std::span<double> x) {
  const std::size_t e = W_emb.rows();
  const std::size_t cols = W_emb.cols();
  const std::size_t ca = static_cast<std::size_t>(a.action);
  const std::size_t co =
      static_cast<std::size_t>(vocab::kNumActionClasses + a.object);
  for (std::size_t i = 0; i < e; ++i) {
    const double* row = W_emb.v.data() + i * cols;
    x[i] = row[ca] + row[co];
  }
}

void embed_pair_backward(const AtomicAction& a, std::span<const double> dx,
                         nn::Tensor& dW_emb) {
  const std::size_t e = dW_emb.rows();
  const std::size_t cols = dW_emb.cols();
  const std::size_t ca = static_cast<std::size_t>(a.action);
  const std::size_t co =
      static_cast<std::size_t>(vocab::kNumActionClasses + a.object);
  for (std::size_t i = 0; i < e; ++i) {
    double* row = dW_emb.v.data() + i * cols;
    row[ca] += dx[i];
    row[co] += dx[i];
  }
}

struct PreppedSeq {
  std::vector<double> f_scene, f_task;
  std::vector<AtomicAction> inputs;   // (start, start), A_1 .. A_W
  std::vector<AtomicAction> targets;  // A_1 .. A_W, (stop, stop)
  std::vector<int> joint_targets;     // filled in joint mode
  double uncertainty = 0.0;
  bool generated = false;
};

PreppedSeq prep_sequence(const Sample& sample,
                         const world::SceneLayout& scene_layout,
                         const ActionPlannerParams& params) {
  PreppedSeq out;
  out.f_scene = sample.feature_override.empty()
                    ? world::encode_scene(sample.scene, scene_layout)
                    : sample.feature_override;
  out.f_task = world::encode_task(sample.task_id);
  out.inputs.push_back(AtomicAction::start());
  out.inputs.insert(out.inputs.end(), sample.sequence.begin(),
                    sample.sequence.end());
  out.targets = sample.sequence;
  out.targets.push_back(AtomicAction::stop());
  if (params.dims.joint()) {
    for (const AtomicAction& t : out.targets) {
      const int id = params.joint_pairs.id_of(t);
      if (id < 0) {
        throw std::invalid_argument("atomic action " + t.to_string() +
                                    " not in joint vocabulary");
      }
      out.joint_targets.push_back(id);
    }
  }
  out.uncertainty = sample.uncertainty;
  out.generated = sample.origin == world::SampleOrigin::Generated;
  return out;
}

// Teacher-forced forward (and optionally backward) over one sequence.
// Returns the summed per-step loss and the step count; `correct` counts
// steps whose full atomic action matches the target under argmax.
std::pair<double, int> run_sequence(const PreppedSeq& ps,
                                    const ActionPlannerParams& params,
                                    ActionPlannerParams* grads,
                                    int* correct = nullptr) {
  const auto e = static_cast<std::size_t>(params.dims.embed);
  const auto h = static_cast<std::size_t>(params.dims.hidden);
  const std::size_t steps = ps.inputs.size();

  detail::TrunkCache trunk;
  detail::trunk_forward(params.W_fI, params.W_fT, params.W_hf, ps.f_scene,
                        ps.f_task, trunk);

  struct StepCache {
    std::vector<double> x;
    nn::LstmStepCache lstm;
    std::vector<double> p_a, p_o, p_j;
  };
  std::vector<StepCache> caches(steps);

  double loss = 0.0;
  std::vector<double> hcur = trunk.h0;
  std::vector<double> ccur(h, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    StepCache& sc = caches[t];
    sc.x.resize(e);
    embed_pair(params.W_emb, ps.inputs[t], sc.x);
    lstm_step(params.lstm, sc.x, hcur, ccur, sc.lstm);
    hcur = sc.lstm.h;
    ccur = sc.lstm.c;
    if (params.dims.joint()) {
      std::vector<double> logits(static_cast<std::size_t>(params.dims.joint_vocab));
      nn::linear(params.W_jh, hcur, params.b_j, logits);
      sc.p_j.resize(logits.size());
      nn::softmax(logits, sc.p_j);
      loss += nn::cross_entropy(sc.p_j, ps.joint_targets[t]);
      if (correct && nn::argmax(sc.p_j) == ps.joint_targets[t]) ++*correct;
    } else {
      std::vector<double> logits_a(vocab::kNumActionClasses);
      std::vector<double> logits_o(vocab::kNumObjectClasses);
      nn::linear(params.W_ah, hcur, params.b_a, logits_a);
      nn::linear(params.W_oh, hcur, params.b_o, logits_o);
      sc.p_a.resize(logits_a.size());
      sc.p_o.resize(logits_o.size());
      nn::softmax(logits_a, sc.p_a);
      nn::softmax(logits_o, sc.p_o);
      loss += nn::cross_entropy(sc.p_a, ps.targets[t].action);
      loss += nn::cross_entropy(sc.p_o, ps.targets[t].object);
      if (correct && nn::argmax(sc.p_a) == ps.targets[t].action &&
          nn::argmax(sc.p_o) == ps.targets[t].object) {
        ++*correct;
      }
    }
  }
  if (!grads) return {loss, static_cast<int>(steps)};

  std::vector<double> dh(h, 0.0), dc(h, 0.0);
  std::vector<double> dx(e), dh_prev(h), dc_prev(h);
  for (std::size_t t = steps; t-- > 0;) {
    StepCache& sc = caches[t];
    if (params.dims.joint()) {
      std::vector<double> dlogits(sc.p_j.size(), 0.0);
      nn::softmax_xent_backward(sc.p_j, ps.joint_targets[t],
                                static_cast<int>(sc.p_j.size()), dlogits);
      nn::linear_backward(params.W_jh, sc.lstm.h, dlogits, grads->W_jh,
                          &grads->b_j, dh);
    } else {
      std::vector<double> dlogits_a(sc.p_a.size(), 0.0);
      nn::softmax_xent_backward(sc.p_a, ps.targets[t].action,
                                vocab::kNumActionClasses, dlogits_a);
      nn::linear_backward(params.W_ah, sc.lstm.h, dlogits_a, grads->W_ah,
                          &grads->b_a, dh);
      std::vector<double> dlogits_o(sc.p_o.size(), 0.0);
      nn::softmax_xent_backward(sc.p_o, ps.targets[t].object,
                                vocab::kNumObjectClasses, dlogits_o);
      nn::linear_backward(params.W_oh, sc.lstm.h, dlogits_o, grads->W_oh,
                          &grads->b_o, dh);
    }
    lstm_step_backward(params.lstm, sc.lstm, dh, dc, grads->lstm, dx, dh_prev,
                       dc_prev);
    embed_pair_backward(ps.inputs[t], dx, grads->W_emb);
    dh = dh_prev;
    dc = dc_prev;
  }
  detail::trunk_backward(params.W_fI, params.W_fT, params.W_hf, trunk,
                         ps.f_scene, ps.f_task, dh, grads->W_fI, grads->W_fT,
                         grads->W_hf);
  return {loss, static_cast<int>(steps)};
}

void scale_grads(std::vector<nn::ParamRef> grads, double factor) {
  for (const auto& g : grads) {
    for (double& x : g.tensor->v) x *= factor;
  }
}

void stratified_split(const std::vector<Sample>& samples, double fraction,
                      std::uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& val) {
  std::map<int, std::vector<std::size_t>> by_task;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    by_task[samples[i].task_id].push_back(i);
  }
  Rng rng = Rng::derive(seed, "valsplit");
  for (auto& [task, indices] : by_task) {
    rng.shuffle(indices);
    const auto n_val = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(indices.size())));
    for (std::size_t i = 0; i < indices.size(); ++i) {
      (i < n_val ? val : train).push_back(indices[i]);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
}

}  // namespace

double teacher_forced_loss(const std::vector<Sample>& samples,
                           const world::SceneLayout& scene_layout,
                           const ActionPlannerParams& params,
                           ActionPlannerParams* grads) {
  double total = 0.0;
  for (const Sample& s : samples) {
    const PreppedSeq ps = prep_sequence(s, scene_layout, params);
    total += run_sequence(ps, params, grads).first;
  }
  return total;
}

namespace {

ActionPlannerParams train_impl(ActionPlannerParams params,
                               const std::vector<Sample>& annotated,
                               const std::vector<Sample>& generated,
                               const world::SceneLayout& scene_layout,
                               const ActionTrainOptions& options,
                               TrainLog* log) {
  if (annotated.empty()) {
    throw std::invalid_argument("train_action_planner: empty annotated set");
  }

  std::vector<PreppedSeq> prepped;
  prepped.reserve(annotated.size() + generated.size());
  for (const Sample& s : annotated) {
    prepped.push_back(prep_sequence(s, scene_layout, params));
  }
  for (const Sample& s : generated) {
    prepped.push_back(prep_sequence(s, scene_layout, params));
    prepped.back().generated = true;
  }

  std::vector<std::size_t> annotated_train, val_idx;
  stratified_split(annotated, options.val_fraction, options.seed,
                   annotated_train, val_idx);
  if (annotated_train.empty()) {
    annotated_train.resize(annotated.size());
    for (std::size_t i = 0; i < annotated.size(); ++i) annotated_train[i] = i;
    val_idx.clear();
  }

  ActionPlannerParams grads = ActionPlannerParams::sized_like(params.dims);
  nn::SgdState sgd(params.registry());

  // (error rate, mean per-step NLL) on a sample set; checkpoint selection
  // follows the lowest validation error with loss as the tiebreak.
  auto eval_split = [&](const std::vector<std::size_t>& idx) {
    double loss = 0.0;
    long long steps = 0;
    int correct = 0;
    for (std::size_t i : idx) {
      auto [l, n] = run_sequence(prepped[i], params, nullptr, &correct);
      loss += l;
      steps += n;
    }
    const double err =
        steps == 0 ? 0.0
                   : 1.0 - static_cast<double>(correct) / static_cast<double>(steps);
    return std::pair<double, double>{
        err, steps == 0 ? 0.0 : loss / static_cast<double>(steps)};
  };

  ActionPlannerParams best = params;
  double best_err = std::numeric_limits<double>::infinity();
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  Rng shuffle_rng = Rng::derive(options.seed, "action-shuffle");

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const double tau = options.curriculum
                           ? options.schedule.tau(epoch)
                           : std::numeric_limits<double>::infinity();
    std::vector<std::size_t> order = annotated_train;
    int included = 0;
    for (std::size_t i = annotated.size(); i < prepped.size(); ++i) {
      if (prepped[i].uncertainty < tau) {
        order.push_back(i);
        ++included;
      }
    }
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    long long epoch_steps = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(options.sgd.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(options.sgd.batch_size));
      nn::zero_grads(grads.registry());
      long long batch_steps = 0;
      for (std::size_t k = start; k < end; ++k) {
        auto [l, n] = run_sequence(prepped[order[k]], params, &grads);
        epoch_loss += l;
        epoch_steps += n;
        batch_steps += n;
      }
      // Caffe-style normalization by the count of per-step loss terms.
      scale_grads(grads.registry(),
                  1.0 / static_cast<double>(std::max<long long>(batch_steps, 1)));
      sgd.step(params.registry(), grads.registry(), options.sgd);
    }

    const double mean_train =
        epoch_loss / static_cast<double>(std::max<long long>(epoch_steps, 1));
    const auto [val_err, val_loss] =
        val_idx.empty() ? std::pair<double, double>{mean_train, mean_train}
                        : eval_split(val_idx);
    if (val_err < best_err || (val_err == best_err && val_loss < best_loss)) {
      best_err = val_err;
      best_loss = val_loss;
      best = params;
      best_epoch = epoch;
    }
    if (log) {
      log->epochs.push_back({epoch, mean_train, val_loss,
                             options.curriculum ? tau : -1.0, included});
    }
  }
  if (log) log->best_epoch = best_epoch;
  return best;
}

}  // namespace

ActionPlannerParams train_action_planner(const std::vector<Sample>& annotated,
                                         const std::vector<Sample>& generated,
                                         const world::SceneLayout& scene_layout,
                                         const ActionPlannerDims& dims,
                                         const ActionTrainOptions& options,
                                         TrainLog* log) {
  if (dims.joint()) {
    throw std::invalid_argument(
        "train_action_planner: use train_action_planner_joint for the "
        "joint-head variant");
  }
  ActionPlannerParams params = ActionPlannerParams::sized_like(dims);
  Rng init_rng = Rng::derive(options.seed, "action-init");
  params.init(init_rng);
  return train_impl(std::move(params), annotated, generated, scene_layout,
                    options, log);
}

ActionPlannerParams train_action_planner_joint(
    const std::vector<Sample>& annotated, const std::vector<Sample>& generated,
    const std::vector<grammar::TaskAog>& catalog,
    const world::SceneLayout& scene_layout, ActionPlannerDims dims,
    const ActionTrainOptions& options, TrainLog* log) {
  const AtomicVocab pairs = AtomicVocab::from_catalog(catalog);
  dims.joint_vocab = pairs.size();
  ActionPlannerParams params = ActionPlannerParams::sized_like(dims);
  params.joint_pairs = pairs;
  Rng init_rng = Rng::derive(options.seed, "action-init");
  params.init(init_rng);
  return train_impl(std::move(params), annotated, generated, scene_layout,
                    options, log);
}

DecodeResult decode_features(std::span<const double> f_scene, int task_id,
                             const ActionPlannerParams& params, int l_max) {
  const auto e = static_cast<std::size_t>(params.dims.embed);
  const auto h = static_cast<std::size_t>(params.dims.hidden);
  const auto f_task = world::encode_task(task_id);
  detail::TrunkCache trunk;
  detail::trunk_forward(params.W_fI, params.W_fT, params.W_hf, f_scene, f_task,
                        trunk);

  DecodeResult out;
  std::vector<double> hcur = trunk.h0, ccur(h, 0.0);
  std::vector<double> x(e);
  AtomicAction prev = AtomicAction::start();
  nn::LstmStepCache cache;
  double entropy_sum = 0.0;
  int steps = 0;
  auto finish = [&](bool truncated) {
    out.truncated = truncated;
    out.mean_entropy = steps == 0 ? 0.0 : entropy_sum / steps;
    return out;
  };
  for (int t = 0; t < l_max; ++t) {
    embed_pair(params.W_emb, prev, x);
    lstm_step(params.lstm, x, hcur, ccur, cache);
    hcur = cache.h;
    ccur = cache.c;
    AtomicAction pair;
    if (params.dims.joint()) {
      std::vector<double> logits(static_cast<std::size_t>(params.dims.joint_vocab));
      nn::linear(params.W_jh, hcur, params.b_j, logits);
      std::vector<double> p(logits.size());
      nn::softmax(logits, p);
      entropy_sum += nn::entropy(p);
      pair = params.joint_pairs.pairs[static_cast<std::size_t>(nn::argmax(p))];
    } else {
      std::vector<double> logits_a(vocab::kNumActionClasses);
      std::vector<double> logits_o(vocab::kNumObjectClasses);
      nn::linear(params.W_ah, hcur, params.b_a, logits_a);
      nn::linear(params.W_oh, hcur, params.b_o, logits_o);
      std::vector<double> p_a(logits_a.size()), p_o(logits_o.size());
      nn::softmax(logits_a, p_a);
      nn::softmax(logits_o, p_o);
      entropy_sum += 0.5 * (nn::entropy(p_a) + nn::entropy(p_o));
      pair = {nn::argmax(p_a), nn::argmax(p_o)};
    }
    ++steps;
    if (pair.is_stop()) return finish(false);
    out.sequence.push_back(pair);
    if (pair.is_task_fail()) return finish(false);
    prev = pair;
  }
  return finish(true);
}

DecodeResult decode(const world::Scene& scene, int task_id,
                    const ActionPlannerParams& params,
                    const world::SceneLayout& scene_layout, int l_max) {
  const auto f_scene = world::encode_scene(scene, scene_layout);
  return decode_features(f_scene, task_id, params, l_max);
}

double sequence_logprob(const world::Scene& scene, int task_id,
                        const std::vector<AtomicAction>& sequence,
                        const ActionPlannerParams& params,
                        const world::SceneLayout& scene_layout) {
  Sample s;
  s.scene = scene;
  s.task_id = task_id;
  s.sequence = sequence;
  PreppedSeq ps = prep_sequence(s, scene_layout, params);
  auto [loss, steps] = run_sequence(ps, params, nullptr);
  (void)steps;
  return -loss;
}

}  // namespace aogplan::planner
