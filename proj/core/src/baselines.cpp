#include "aogplan/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "aogplan/nn/ops.hpp"
#include "planner_common.hpp"

namespace aogplan::eval {

using planner::ActionPlannerDims;
using planner::ActionTrainOptions;
using planner::DecodeResult;
using planner::kPairEncodingDim;
using world::Sample;

// ---------------------------------------------------------------------------
// Nearest neighbor

NearestNeighborBaseline::NearestNeighborBaseline(
    const std::vector<Sample>& train, const world::SceneLayout& layout)
    : layout_(layout) {
  entries_.reserve(train.size());
  for (const Sample& s : train) {
    entries_.push_back(
        {world::encode_scene(s.scene, layout), s.task_id, s.sequence});
  }
}

bool NearestNeighborBaseline::covers_task(int task_id) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.task_id == task_id; });
}

std::vector<AtomicAction> NearestNeighborBaseline::predict(
    const world::Scene& scene, int task_id) const {
  const auto query = world::encode_scene(scene, layout_);
  const Entry* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const Entry& e : entries_) {
    if (e.task_id != task_id) continue;
    double dist = 0;
    for (size_t k = 0; k < query.size(); ++k) {
      const double d = query[k] - e.features[k];
      dist += d * d;
    }
    if (dist < best_dist) {  // strict: ties keep the lowest sample index
      best_dist = dist;
      best = &e;
    }
  }
  if (!best) {
    throw std::invalid_argument("nearest neighbor: no training samples for task " +
                                std::to_string(task_id));
  }
  return best->sequence;
}

// ---------------------------------------------------------------------------
// MLP

void MlpBaselineParams::resize(int scene_dim_, int task_dim_, int hidden_) {
  scene_dim = scene_dim_;
  task_dim = task_dim_;
  hidden = hidden_;
  const auto h = static_cast<std::size_t>(hidden);
  W1.resize({h, static_cast<std::size_t>(input_dim())});
  b1.resize({h});
  W_ah.resize({static_cast<std::size_t>(vocab::kNumActionClasses), h});
  b_a.resize({static_cast<std::size_t>(vocab::kNumActionClasses)});
  W_oh.resize({static_cast<std::size_t>(vocab::kNumObjectClasses), h});
  b_o.resize({static_cast<std::size_t>(vocab::kNumObjectClasses)});
}

void MlpBaselineParams::init(Rng& rng) {
  nn::init_uniform_fan(rng, W1, W1.cols(), W1.rows());
  b1.fill(0.0);
  nn::init_uniform_fan(rng, W_ah, W_ah.cols(), W_ah.rows());
  b_a.fill(0.0);
  nn::init_uniform_fan(rng, W_oh, W_oh.cols(), W_oh.rows());
  b_o.fill(0.0);
}

std::vector<nn::ParamRef> MlpBaselineParams::registry() {
  return {{"W1", &W1},     {"b1", &b1},   {"W_ah", &W_ah},
          {"b_a", &b_a},   {"W_oh", &W_oh}, {"b_o", &b_o}};
}

namespace {

void write_pair_block(const AtomicAction& a, double* block) {
  std::fill(block, block + kPairEncodingDim, 0.0);
  block[a.action] = 1.0;
  block[vocab::kNumActionClasses + a.object] = 1.0;
}

// Input = f_I ++ f_T ++ the last `kMlpHistoryWindow` atomic actions of
// history (oldest first, zero blocks where history is shorter).
std::vector<double> mlp_input(std::span<const double> f_scene,
                              std::span<const double> f_task,
                              const std::vector<AtomicAction>& history,
                              const MlpBaselineParams& params) {
  std::vector<double> x(static_cast<std::size_t>(params.input_dim()), 0.0);
  std::copy(f_scene.begin(), f_scene.end(), x.begin());
  std::copy(f_task.begin(), f_task.end(),
            x.begin() + static_cast<std::ptrdiff_t>(f_scene.size()));
  double* window = x.data() + f_scene.size() + f_task.size();
  const size_t n = std::min<size_t>(history.size(), kMlpHistoryWindow);
  for (size_t k = 0; k < n; ++k) {
    // slot (kMlpHistoryWindow - n + k) holds history[history.size() - n + k]
    write_pair_block(history[history.size() - n + k],
                     window + (kMlpHistoryWindow - n + k) * kPairEncodingDim);
  }
  return x;
}

struct MlpExample {
  std::vector<double> x;
  AtomicAction target;
};

double mlp_forward(const MlpBaselineParams& params, std::span<const double> x,
                   const AtomicAction& target, MlpBaselineParams* grads,
                   AtomicAction* predicted = nullptr) {
  const auto h = static_cast<std::size_t>(params.hidden);
  std::vector<double> pre(h), act(h);
  nn::linear(params.W1, x, params.b1, pre);
  nn::relu(pre, act);
  std::vector<double> logits_a(vocab::kNumActionClasses);
  std::vector<double> logits_o(vocab::kNumObjectClasses);
  nn::linear(params.W_ah, act, params.b_a, logits_a);
  nn::linear(params.W_oh, act, params.b_o, logits_o);
  std::vector<double> p_a(logits_a.size()), p_o(logits_o.size());
  nn::softmax(logits_a, p_a);
  nn::softmax(logits_o, p_o);
  if (predicted) *predicted = {nn::argmax(logits_a), nn::argmax(logits_o)};
  const double loss = nn::cross_entropy(p_a, target.action) +
                      nn::cross_entropy(p_o, target.object);
  if (!grads) return loss;

  std::vector<double> dact(h, 0.0);
  std::vector<double> dl_a(p_a.size(), 0.0), dl_o(p_o.size(), 0.0);
  nn::softmax_xent_backward(p_a, target.action, vocab::kNumActionClasses, dl_a);
  nn::softmax_xent_backward(p_o, target.object, vocab::kNumObjectClasses, dl_o);
  nn::linear_backward(params.W_ah, act, dl_a, grads->W_ah, &grads->b_a, dact);
  nn::linear_backward(params.W_oh, act, dl_o, grads->W_oh, &grads->b_o, dact);
  std::vector<double> dpre(h, 0.0);
  nn::relu_backward(act, dact, dpre);
  nn::linear_backward(params.W1, x, dpre, grads->W1, &grads->b1, {});
  return loss;
}

void scale_all(std::vector<nn::ParamRef> refs, double factor) {
  for (const auto& r : refs) {
    for (double& v : r.tensor->v) v *= factor;
  }
}

}  // namespace

MlpBaselineParams train_mlp_baseline(const std::vector<Sample>& train,
                                     const world::SceneLayout& layout,
                                     int hidden,
                                     const ActionTrainOptions& options) {
  MlpBaselineParams params;
  params.resize(layout.scene_feat_dim(), vocab::kNumTasks, hidden);
  Rng init_rng = Rng::derive(options.seed, "mlp-init");
  params.init(init_rng);

  // Every (sample, step) is one independent classification example.
  std::vector<MlpExample> examples;
  std::vector<std::size_t> val_examples_start;  // examples from val samples
  std::map<int, std::vector<std::size_t>> by_task;
  for (std::size_t i = 0; i < train.size(); ++i) {
    by_task[train[i].task_id].push_back(i);
  }
  Rng split_rng = Rng::derive(options.seed, "valsplit");
  std::vector<bool> is_val(train.size(), false);
  for (auto& [task, indices] : by_task) {
    split_rng.shuffle(indices);
    const auto n_val = static_cast<std::size_t>(
        std::floor(options.val_fraction * static_cast<double>(indices.size())));
    for (std::size_t k = 0; k < n_val; ++k) is_val[indices[k]] = true;
  }

  std::vector<MlpExample> val_set;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const Sample& s = train[i];
    const auto f_scene = world::encode_scene(s.scene, layout);
    const auto f_task = world::encode_task(s.task_id);
    std::vector<AtomicAction> history = {AtomicAction::start()};
    std::vector<AtomicAction> targets = s.sequence;
    targets.push_back(AtomicAction::stop());
    for (const AtomicAction& target : targets) {
      MlpExample ex;
      ex.x = mlp_input(f_scene, f_task, history, params);
      ex.target = target;
      (is_val[i] ? val_set : examples).push_back(std::move(ex));
      history.push_back(target);
    }
  }

  MlpBaselineParams grads;
  grads.resize(params.scene_dim, params.task_dim, params.hidden);
  nn::SgdState sgd(params.registry());
  Rng shuffle_rng = Rng::derive(options.seed, "mlp-shuffle");
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  MlpBaselineParams best = params;
  double best_val = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double train_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(options.sgd.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(options.sgd.batch_size));
      nn::zero_grads(grads.registry());
      for (std::size_t k = start; k < end; ++k) {
        const MlpExample& ex = examples[order[k]];
        train_loss += mlp_forward(params, ex.x, ex.target, &grads);
      }
      scale_all(grads.registry(), 1.0 / static_cast<double>(end - start));
      sgd.step(params.registry(), grads.registry(), options.sgd);
    }
    double val_loss = 0.0;
    if (!val_set.empty()) {
      for (const MlpExample& ex : val_set) {
        val_loss += mlp_forward(params, ex.x, ex.target, nullptr);
      }
      val_loss /= static_cast<double>(val_set.size());
    } else {
      val_loss = train_loss / static_cast<double>(std::max<std::size_t>(
                                  examples.size(), 1));
    }
    if (val_loss < best_val) {
      best_val = val_loss;
      best = params;
    }
  }
  return best;
}

DecodeResult decode_mlp(const world::Scene& scene, int task_id,
                        const MlpBaselineParams& params,
                        const world::SceneLayout& layout, int l_max) {
  const auto f_scene = world::encode_scene(scene, layout);
  const auto f_task = world::encode_task(task_id);
  DecodeResult out;
  std::vector<AtomicAction> history = {AtomicAction::start()};
  for (int t = 0; t < l_max; ++t) {
    const auto x = mlp_input(f_scene, f_task, history, params);
    AtomicAction pair;
    mlp_forward(params, x, AtomicAction::stop(), nullptr, &pair);
    if (pair.is_stop()) return out;
    out.sequence.push_back(pair);
    if (pair.is_task_fail()) return out;
    history.push_back(pair);
  }
  out.truncated = true;
  return out;
}

// ---------------------------------------------------------------------------
// RNN

void RnnBaselineParams::resize(const ActionPlannerDims& d) {
  dims = d;
  const auto e = static_cast<std::size_t>(d.embed);
  const auto h = static_cast<std::size_t>(d.hidden);
  W_fI.resize({e, static_cast<std::size_t>(d.scene_dim)});
  W_fT.resize({e, static_cast<std::size_t>(d.task_dim)});
  W_hf.resize({h, 2 * e});
  W_emb.resize({e, static_cast<std::size_t>(kPairEncodingDim)});
  cell.resize(e, h);
  W_ah.resize({static_cast<std::size_t>(vocab::kNumActionClasses), h});
  b_a.resize({static_cast<std::size_t>(vocab::kNumActionClasses)});
  W_oh.resize({static_cast<std::size_t>(vocab::kNumObjectClasses), h});
  b_o.resize({static_cast<std::size_t>(vocab::kNumObjectClasses)});
}

void RnnBaselineParams::init(Rng& rng) {
  nn::init_uniform_fan(rng, W_fI, W_fI.cols(), W_fI.rows());
  nn::init_uniform_fan(rng, W_fT, W_fT.cols(), W_fT.rows());
  nn::init_uniform_fan(rng, W_hf, W_hf.cols(), W_hf.rows());
  nn::init_uniform_fan(rng, W_emb, W_emb.cols(), W_emb.rows());
  nn::init_uniform_fan(rng, cell.Wx, cell.Wx.cols(), cell.hidden_dim());
  nn::init_uniform_fan(rng, cell.Wh, cell.Wh.cols(), cell.hidden_dim());
  cell.b.fill(0.0);
  nn::init_uniform_fan(rng, W_ah, W_ah.cols(), W_ah.rows());
  b_a.fill(0.0);
  nn::init_uniform_fan(rng, W_oh, W_oh.cols(), W_oh.rows());
  b_o.fill(0.0);
}

std::vector<nn::ParamRef> RnnBaselineParams::registry() {
  return {{"W_fI", &W_fI},     {"W_fT", &W_fT}, {"W_hf", &W_hf},
          {"W_emb", &W_emb},   {"cell.Wx", &cell.Wx},
          {"cell.Wh", &cell.Wh}, {"cell.b", &cell.b},
          {"W_ah", &W_ah},     {"b_a", &b_a},
          {"W_oh", &W_oh},     {"b_o", &b_o}};
}

std::vector<double> rnn_cell_step(const nn::TanhCellParams& cell,
                                  std::span<const double> x,
                                  std::span<const double> h_prev) {
  nn::TanhStepCache cache;
  nn::tanh_step(cell, x, h_prev, cache);
  return cache.h;
}

namespace {

struct RnnPrepped {
  std::vector<double> f_scene, f_task;
  std::vector<AtomicAction> inputs, targets;
};

void embed_pair_rnn(const nn::Tensor& W_emb, const AtomicAction& a,
                    std::span<double> x) {
  const std::size_t e = W_emb.rows();
  const std::size_t cols = W_emb.cols();
  for (std::size_t i = 0; i < e; ++i) {
    const double* row = W_emb.v.data() + i * cols;
    x[i] = row[a.action] + row[vocab::kNumActionClasses + a.object];
  }
}

std::pair<double, int> run_rnn(const RnnPrepped& ps,
                               const RnnBaselineParams& params,
                               RnnBaselineParams* grads) {
  const auto e = static_cast<std::size_t>(params.dims.embed);
  const auto h = static_cast<std::size_t>(params.dims.hidden);
  planner::detail::TrunkCache trunk;
  planner::detail::trunk_forward(params.W_fI, params.W_fT, params.W_hf,
                                 ps.f_scene, ps.f_task, trunk);
  struct StepCache {
    std::vector<double> x;
    nn::TanhStepCache cell;
    std::vector<double> p_a, p_o;
  };
  const std::size_t steps = ps.inputs.size();
  std::vector<StepCache> caches(steps);
  double loss = 0.0;
  std::vector<double> hcur = trunk.h0;
  for (std::size_t t = 0; t < steps; ++t) {
    StepCache& sc = caches[t];
    sc.x.resize(e);
    embed_pair_rnn(params.W_emb, ps.inputs[t], sc.x);
    nn::tanh_step(params.cell, sc.x, hcur, sc.cell);
    hcur = sc.cell.h;
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
  }
  if (!grads) return {loss, static_cast<int>(steps)};

  std::vector<double> dh(h, 0.0);
  std::vector<double> dx(e), dh_prev(h);
  for (std::size_t t = steps; t-- > 0;) {
    StepCache& sc = caches[t];
    std::vector<double> dl_a(sc.p_a.size(), 0.0), dl_o(sc.p_o.size(), 0.0);
    nn::softmax_xent_backward(sc.p_a, ps.targets[t].action,
                              vocab::kNumActionClasses, dl_a);
    nn::softmax_xent_backward(sc.p_o, ps.targets[t].object,
                              vocab::kNumObjectClasses, dl_o);
    nn::linear_backward(params.W_ah, sc.cell.h, dl_a, grads->W_ah, &grads->b_a,
                        dh);
    nn::linear_backward(params.W_oh, sc.cell.h, dl_o, grads->W_oh, &grads->b_o,
                        dh);
    nn::tanh_step_backward(params.cell, sc.cell, dh, grads->cell, dx, dh_prev);
    for (std::size_t i = 0; i < e; ++i) {
      double* row = grads->W_emb.v.data() + i * grads->W_emb.cols();
      row[ps.inputs[t].action] += dx[i];
      row[vocab::kNumActionClasses + ps.inputs[t].object] += dx[i];
    }
    dh = dh_prev;
  }
  planner::detail::trunk_backward(params.W_fI, params.W_fT, params.W_hf, trunk,
                                  ps.f_scene, ps.f_task, dh, grads->W_fI,
                                  grads->W_fT, grads->W_hf);
  return {loss, static_cast<int>(steps)};
}

}  // namespace

RnnBaselineParams train_rnn_baseline(const std::vector<Sample>& train,
                                     const world::SceneLayout& layout,
                                     const ActionPlannerDims& dims,
                                     const ActionTrainOptions& options) {
  RnnBaselineParams params;
  params.resize(dims);
  Rng init_rng = Rng::derive(options.seed, "rnn-init");
  params.init(init_rng);

  std::vector<RnnPrepped> prepped;
  prepped.reserve(train.size());
  for (const Sample& s : train) {
    RnnPrepped ps;
    ps.f_scene = world::encode_scene(s.scene, layout);
    ps.f_task = world::encode_task(s.task_id);
    ps.inputs.push_back(AtomicAction::start());
    ps.inputs.insert(ps.inputs.end(), s.sequence.begin(), s.sequence.end());
    ps.targets = s.sequence;
    ps.targets.push_back(AtomicAction::stop());
    prepped.push_back(std::move(ps));
  }

  std::map<int, std::vector<std::size_t>> by_task;
  for (std::size_t i = 0; i < train.size(); ++i) {
    by_task[train[i].task_id].push_back(i);
  }
  Rng split_rng = Rng::derive(options.seed, "valsplit");
  std::vector<std::size_t> train_idx, val_idx;
  for (auto& [task, indices] : by_task) {
    split_rng.shuffle(indices);
    const auto n_val = static_cast<std::size_t>(
        std::floor(options.val_fraction * static_cast<double>(indices.size())));
    for (std::size_t k = 0; k < indices.size(); ++k) {
      (k < n_val ? val_idx : train_idx).push_back(indices[k]);
    }
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  if (train_idx.empty()) {
    train_idx.resize(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) train_idx[i] = i;
    val_idx.clear();
  }

  RnnBaselineParams grads;
  grads.resize(dims);
  nn::SgdState sgd(params.registry());
  Rng shuffle_rng = Rng::derive(options.seed, "rnn-shuffle");
  std::vector<std::size_t> order = train_idx;

  RnnBaselineParams best = params;
  double best_val = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
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
        auto [l, n] = run_rnn(prepped[order[k]], params, &grads);
        epoch_loss += l;
        epoch_steps += n;
        batch_steps += n;
      }
      scale_all(grads.registry(),
                1.0 / static_cast<double>(std::max<long long>(batch_steps, 1)));
      sgd.step(params.registry(), grads.registry(), options.sgd);
    }
    double val_loss;
    if (!val_idx.empty()) {
      double loss = 0.0;
      long long steps = 0;
      for (std::size_t i : val_idx) {
        auto [l, n] = run_rnn(prepped[i], params, nullptr);
        loss += l;
        steps += n;
      }
      val_loss = loss / static_cast<double>(std::max<long long>(steps, 1));
    } else {
      val_loss =
          epoch_loss / static_cast<double>(std::max<long long>(epoch_steps, 1));
    }
    if (val_loss < best_val) {
      best_val = val_loss;
      best = params;
    }
  }
  return best;
}

DecodeResult decode_rnn(const world::Scene& scene, int task_id,
                        const RnnBaselineParams& params,
                        const world::SceneLayout& layout, int l_max) {
  const auto e = static_cast<std::size_t>(params.dims.embed);
  const auto f_scene = world::encode_scene(scene, layout);
  const auto f_task = world::encode_task(task_id);
  planner::detail::TrunkCache trunk;
  planner::detail::trunk_forward(params.W_fI, params.W_fT, params.W_hf, f_scene,
                                 f_task, trunk);
  DecodeResult out;
  std::vector<double> hcur = trunk.h0;
  std::vector<double> x(e);
  AtomicAction prev = AtomicAction::start();
  nn::TanhStepCache cache;
  for (int t = 0; t < l_max; ++t) {
    embed_pair_rnn(params.W_emb, prev, x);
    nn::tanh_step(params.cell, x, hcur, cache);
    hcur = cache.h;
    std::vector<double> logits_a(vocab::kNumActionClasses);
    std::vector<double> logits_o(vocab::kNumObjectClasses);
    nn::linear(params.W_ah, hcur, params.b_a, logits_a);
    nn::linear(params.W_oh, hcur, params.b_o, logits_o);
    AtomicAction pair{nn::argmax(logits_a), nn::argmax(logits_o)};
    if (pair.is_stop()) return out;
    out.sequence.push_back(pair);
    if (pair.is_task_fail()) return out;
    prev = pair;
  }
  out.truncated = true;
  return out;
}

}  // namespace aogplan::eval
