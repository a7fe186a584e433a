#include "aogplan/aog_planner.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "aogplan/nn/ops.hpp"
#include "json.hpp"
#include "planner_common.hpp"

namespace aogplan::planner {

using grammar::TaskAog;
using world::Sample;

void AogPlannerParams::resize(const AogPlannerDims& d) {
  dims = d;
  const auto e = static_cast<std::size_t>(d.embed);
  const auto h = static_cast<std::size_t>(d.hidden);
  W_fI.resize({e, static_cast<std::size_t>(d.scene_dim)});
  W_fT.resize({e, static_cast<std::size_t>(d.task_dim)});
  W_hf.resize({h, 2 * e});
  W_emb.resize({e, static_cast<std::size_t>(d.aog_dim)});
  lstm.resize(e, h);
  W_hp.resize({static_cast<std::size_t>(grammar::kMaxBranches), h});
  b_p.resize({static_cast<std::size_t>(grammar::kMaxBranches)});
}

void AogPlannerParams::init(Rng& rng) {
  nn::init_uniform_fan(rng, W_fI, W_fI.cols(), W_fI.rows());
  nn::init_uniform_fan(rng, W_fT, W_fT.cols(), W_fT.rows());
  nn::init_uniform_fan(rng, W_hf, W_hf.cols(), W_hf.rows());
  nn::init_uniform_fan(rng, W_emb, W_emb.cols(), W_emb.rows());
  nn::init_uniform_fan(rng, lstm.Wx, lstm.Wx.cols(), lstm.hidden_dim());
  nn::init_uniform_fan(rng, lstm.Wh, lstm.Wh.cols(), lstm.hidden_dim());
  lstm.b.fill(0.0);
  // Forget-gate bias starts at one so early training does not flush state.
  const std::size_t h = lstm.hidden_dim();
  for (std::size_t k = h; k < 2 * h; ++k) lstm.b.v[k] = 1.0;
  nn::init_uniform_fan(rng, W_hp, W_hp.cols(), W_hp.rows());
  b_p.fill(0.0);
}

std::vector<nn::ParamRef> AogPlannerParams::registry() {
  return {
      {"W_fI", &W_fI},       {"W_fT", &W_fT}, {"W_hf", &W_hf},
      {"W_emb", &W_emb},     {"lstm.Wx", &lstm.Wx},
      {"lstm.Wh", &lstm.Wh}, {"lstm.b", &lstm.b},
      {"W_hp", &W_hp},       {"b_p", &b_p},
  };
}

std::string AogPlannerParams::meta_json() const {
  nlohmann::json doc;
  doc["model"] = "aog_planner";
  doc["scene_dim"] = dims.scene_dim;
  doc["task_dim"] = dims.task_dim;
  doc["aog_dim"] = dims.aog_dim;
  doc["embed"] = dims.embed;
  doc["hidden"] = dims.hidden;
  return doc.dump();
}

void save_aog_planner(const std::filesystem::path& path,
                      AogPlannerParams& params) {
  nn::save_checkpoint(path, params.registry(), params.meta_json());
}

AogPlannerParams load_aog_planner(const std::filesystem::path& path) {
  const auto meta = nlohmann::json::parse(nn::read_checkpoint_meta(path));
  if (meta.value("model", "") != "aog_planner") {
    throw nn::CheckpointError(path.string() + ": not an aog planner");
  }
  AogPlannerDims dims;
  dims.scene_dim = meta.at("scene_dim").get<int>();
  dims.task_dim = meta.at("task_dim").get<int>();
  dims.aog_dim = meta.at("aog_dim").get<int>();
  dims.embed = meta.at("embed").get<int>();
  dims.hidden = meta.at("hidden").get<int>();
  AogPlannerParams params = AogPlannerParams::sized_like(dims);
  nn::load_checkpoint(path, params.registry());
  return params;
}

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  os << "epoch,tau,included,train_loss,val_loss\n";
  for (const EpochStats& e : epochs) {
    os << e.epoch << ',' << e.tau << ',' << e.included << ',' << e.train_loss
       << ',' << e.val_loss << "\n";
  }
  return os.str();
}

InitState init_state(std::span<const double> f_scene,
                     std::span<const double> f_task,
                     const AogPlannerParams& params) {
  detail::TrunkCache cache;
  detail::trunk_forward(params.W_fI, params.W_fT, params.W_hf, f_scene, f_task,
                        cache);
  InitState st;
  st.h0 = cache.h0;
  st.c0.assign(static_cast<std::size_t>(params.dims.hidden), 0.0);
  st.scene_act = std::move(cache.scene_act);
  st.task_act = std::move(cache.task_act);
  return st;
}

SelectStep select_step(std::vector<double>& h, std::vector<double>& c,
                       std::span<const double> aog_encoding,
                       const AogPlannerParams& params, int valid_branches) {
  std::vector<double> x(static_cast<std::size_t>(params.dims.embed));
  nn::linear(params.W_emb, aog_encoding, x);
  nn::LstmStepCache cache;
  lstm_step(params.lstm, x, h, c, cache);
  h = cache.h;
  c = cache.c;

  SelectStep out;
  std::vector<double> logits(grammar::kMaxBranches);
  nn::linear(params.W_hp, h, params.b_p, logits);
  out.p.resize(grammar::kMaxBranches);
  nn::masked_softmax(logits, valid_branches, out.p);
  out.branch = nn::argmax(std::span<const double>(out.p.data(),
                                                  static_cast<std::size_t>(valid_branches)));
  out.branch_entropy = nn::entropy(out.p);
  return out;
}

namespace {

struct PreppedStep {
  std::vector<double> encoding;
  int valid = 0;
  int target = 0;
};

struct PreppedSample {
  std::vector<double> f_scene, f_task;
  std::vector<PreppedStep> steps;
};

PreppedSample prep_sample(const Sample& sample,
                          const std::vector<TaskAog>& catalog,
                          const grammar::AogEncodingLayout& enc_layout,
                          const world::SceneLayout& scene_layout) {
  PreppedSample out;
  out.f_scene = world::encode_scene(sample.scene, scene_layout);
  out.f_task = world::encode_task(sample.task_id);
  TaskAog graph = catalog[static_cast<std::size_t>(sample.task_id)];
  for (const auto& sel : sample.selections) {
    PreppedStep step;
    step.encoding = grammar::encode_aog(graph, enc_layout);
    step.valid = static_cast<int>(graph.node(sel.or_id).children.size());
    step.target = sel.branch;
    out.steps.push_back(std::move(step));
    graph = grammar::apply_selection(graph, sel.or_id, sel.branch);
  }
  return out;
}

// Teacher-forced forward over one sample; optionally backpropagates into
// `grads`. Returns the summed per-node NLL and the number of steps.
std::pair<double, int> run_sample(const PreppedSample& ps,
                                  const AogPlannerParams& params,
                                  AogPlannerParams* grads,
                                  int* correct = nullptr) {
  const auto e = static_cast<std::size_t>(params.dims.embed);
  const auto h = static_cast<std::size_t>(params.dims.hidden);
  detail::TrunkCache trunk;
  detail::trunk_forward(params.W_fI, params.W_fT, params.W_hf, ps.f_scene,
                        ps.f_task, trunk);

  struct StepCache {
    std::vector<double> x;
    nn::LstmStepCache lstm;
    std::vector<double> p;
  };
  std::vector<StepCache> caches(ps.steps.size());

  double loss = 0.0;
  std::vector<double> hcur = trunk.h0;
  std::vector<double> ccur(h, 0.0);
  for (std::size_t t = 0; t < ps.steps.size(); ++t) {
    const PreppedStep& step = ps.steps[t];
    StepCache& sc = caches[t];
    sc.x.resize(e);
    nn::linear(params.W_emb, step.encoding, sc.x);
    lstm_step(params.lstm, sc.x, hcur, ccur, sc.lstm);
    hcur = sc.lstm.h;
    ccur = sc.lstm.c;
    std::vector<double> logits(grammar::kMaxBranches);
    nn::linear(params.W_hp, hcur, params.b_p, logits);
    sc.p.resize(grammar::kMaxBranches);
    nn::masked_softmax(logits, step.valid, sc.p);
    loss += nn::cross_entropy(sc.p, step.target);
    if (correct) {
      std::span<const double> valid_p(sc.p.data(),
                                      static_cast<std::size_t>(step.valid));
      if (nn::argmax(valid_p) == step.target) ++*correct;
    }
  }
  if (!grads) return {loss, static_cast<int>(ps.steps.size())};

  std::vector<double> dh(h, 0.0), dc(h, 0.0);
  std::vector<double> dx(e), dh_prev(h), dc_prev(h);
  for (std::size_t t = ps.steps.size(); t-- > 0;) {
    const PreppedStep& step = ps.steps[t];
    StepCache& sc = caches[t];
    std::vector<double> dlogits(grammar::kMaxBranches, 0.0);
    nn::softmax_xent_backward(sc.p, step.target, step.valid, dlogits);
    nn::linear_backward(params.W_hp, sc.lstm.h, dlogits, grads->W_hp,
                        &grads->b_p, dh);
    lstm_step_backward(params.lstm, sc.lstm, dh, dc, grads->lstm, dx, dh_prev,
                       dc_prev);
    nn::linear_backward(params.W_emb, step.encoding, dx, grads->W_emb, nullptr,
                        {});
    dh = dh_prev;
    dc = dc_prev;
  }

  detail::trunk_backward(params.W_fI, params.W_fT, params.W_hf, trunk,
                         ps.f_scene, ps.f_task, dh, grads->W_fI, grads->W_fT,
                         grads->W_hf);
  return {loss, static_cast<int>(ps.steps.size())};
}

void scale_grads(std::vector<nn::ParamRef> grads, double factor) {
  for (const auto& g : grads) {
    for (double& x : g.tensor->v) x *= factor;
  }
}

// Stratified-by-task validation split; deterministic per seed.
void split_validation(const std::vector<std::size_t>& all_indices,
                      const std::vector<Sample>& samples, double fraction,
                      std::uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& val) {
  std::map<int, std::vector<std::size_t>> by_task;
  for (std::size_t idx : all_indices) {
    by_task[samples[idx].task_id].push_back(idx);
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
                           const std::vector<TaskAog>& catalog,
                           const grammar::AogEncodingLayout& enc_layout,
                           const world::SceneLayout& scene_layout,
                           const AogPlannerParams& params,
                           AogPlannerParams* grads) {
  double total = 0.0;
  for (const Sample& s : samples) {
    const PreppedSample ps = prep_sample(s, catalog, enc_layout, scene_layout);
    total += run_sample(ps, params, grads).first;
  }
  return total;
}

AogPlannerParams train_aog_planner(const std::vector<Sample>& annotated,
                                   const std::vector<TaskAog>& catalog,
                                   const grammar::AogEncodingLayout& enc_layout,
                                   const world::SceneLayout& scene_layout,
                                   const AogPlannerDims& dims,
                                   const AogTrainOptions& options,
                                   TrainLog* log) {
  if (annotated.empty()) {
    throw std::invalid_argument("train_aog_planner: empty dataset");
  }

  std::vector<PreppedSample> prepped;
  std::vector<std::size_t> usable;  // samples that contribute selection steps
  prepped.reserve(annotated.size());
  for (std::size_t i = 0; i < annotated.size(); ++i) {
    prepped.push_back(
        prep_sample(annotated[i], catalog, enc_layout, scene_layout));
    if (!prepped.back().steps.empty()) usable.push_back(i);
  }
  if (usable.empty()) {
    throw std::invalid_argument("train_aog_planner: no selection steps");
  }

  std::vector<std::size_t> train_idx, val_idx;
  split_validation(usable, annotated, options.val_fraction, options.seed,
                   train_idx, val_idx);
  if (train_idx.empty()) train_idx = usable;

  AogPlannerParams params = AogPlannerParams::sized_like(dims);
  Rng init_rng = Rng::derive(options.seed, "aog-init");
  params.init(init_rng);
  AogPlannerParams grads = AogPlannerParams::sized_like(dims);
  nn::SgdState sgd(params.registry());

  // (error rate, mean per-step NLL) over a sample set.
  auto eval_split = [&](const std::vector<std::size_t>& idx) {
    double loss = 0.0;
    int steps = 0, correct = 0;
    for (std::size_t i : idx) {
      auto [l, n] = run_sample(prepped[i], params, nullptr, &correct);
      loss += l;
      steps += n;
    }
    const double err =
        steps == 0 ? 0.0 : 1.0 - static_cast<double>(correct) / steps;
    return std::pair<double, double>{err, steps == 0 ? 0.0 : loss / steps};
  };

  // Checkpoint selection follows the lowest validation error, with the
  // validation loss breaking ties.
  AogPlannerParams best = params;
  double best_err = std::numeric_limits<double>::infinity();
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  Rng shuffle_rng = Rng::derive(options.seed, "aog-shuffle");

  std::vector<std::size_t> order = train_idx;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int epoch_steps = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(options.sgd.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(options.sgd.batch_size));
      nn::zero_grads(grads.registry());
      int batch_steps = 0;
      for (std::size_t k = start; k < end; ++k) {
        auto [l, n] = run_sample(prepped[order[k]], params, &grads);
        epoch_loss += l;
        epoch_steps += n;
        batch_steps += n;
      }
      // Normalize by the number of loss terms in the batch (Caffe style), so
      // every or-node decision carries the same gradient weight regardless
      // of how many choices its sample has.
      scale_grads(grads.registry(), 1.0 / std::max(batch_steps, 1));
      sgd.step(params.registry(), grads.registry(), options.sgd);
    }

    const auto [val_err, val_loss] =
        val_idx.empty()
            ? std::pair<double, double>{epoch_loss / std::max(epoch_steps, 1),
                                        epoch_loss / std::max(epoch_steps, 1)}
            : eval_split(val_idx);
    if (val_err < best_err ||
        (val_err == best_err && val_loss < best_loss)) {
      best_err = val_err;
      best_loss = val_loss;
      best = params;
      best_epoch = epoch;
    }
    if (log) {
      log->epochs.push_back({epoch, epoch_loss / std::max(epoch_steps, 1),
                             val_loss, 0.0, 0});
    }
  }
  if (log) log->best_epoch = best_epoch;
  return best;
}

world::Sample generate_sample(const world::Scene& scene, const TaskAog& task,
                              const AogPlannerParams& params,
                              const grammar::AogEncodingLayout& enc_layout,
                              const world::SceneLayout& scene_layout) {
  const auto f_scene = world::encode_scene(scene, scene_layout);
  const auto f_task = world::encode_task(task.task_id);
  InitState st = init_state(f_scene, f_task, params);
  std::vector<double> h = st.h0, c = st.c0;

  TaskAog graph = task;
  Sample out;
  out.scene = scene;
  out.task_id = task.task_id;
  out.origin = world::SampleOrigin::Generated;

  double entropy_sum = 0.0;
  int n_steps = 0;
  while (true) {
    auto pending = grammar::or_node_order(graph);
    if (pending.empty()) break;
    const grammar::NodeId or_id = pending.front();
    const int valid =
        static_cast<int>(graph.node(or_id).children.size());
    const auto encoding = grammar::encode_aog(graph, enc_layout);
    SelectStep step = select_step(h, c, encoding, params, valid);
    out.selections.push_back({or_id, step.branch});
    entropy_sum += step.branch_entropy;
    ++n_steps;
    graph = grammar::apply_selection(graph, or_id, step.branch);
  }
  out.sequence = grammar::linearize(graph);
  out.uncertainty = n_steps == 0 ? 0.0 : entropy_sum / n_steps;
  return out;
}

std::vector<Sample> augment(const std::vector<world::PoolEntry>& pool,
                            const std::vector<TaskAog>& catalog,
                            const AogPlannerParams& params,
                            const grammar::AogEncodingLayout& enc_layout,
                            const world::SceneLayout& scene_layout,
                            const std::vector<Sample>& annotated) {
  std::set<std::uint64_t> seen;
  for (const Sample& s : annotated) {
    seen.insert(world::sample_key(s.scene, s.task_id));
  }
  std::vector<Sample> generated;
  generated.reserve(pool.size());
  for (const world::PoolEntry& entry : pool) {
    if (!seen.insert(world::sample_key(entry.scene, entry.task_id)).second) {
      continue;
    }
    generated.push_back(
        generate_sample(entry.scene, catalog[static_cast<std::size_t>(entry.task_id)],
                        params, enc_layout, scene_layout));
  }
  return generated;
}

double selection_accuracy(const std::vector<Sample>& samples,
                          const std::vector<TaskAog>& catalog,
                          const AogPlannerParams& params,
                          const grammar::AogEncodingLayout& enc_layout,
                          const world::SceneLayout& scene_layout) {
  long long correct = 0, total = 0;
  for (const Sample& s : samples) {
    if (s.selections.empty()) continue;
    PreppedSample ps = prep_sample(s, catalog, enc_layout, scene_layout);
    int sample_correct = 0;
    run_sample(ps, params, nullptr, &sample_correct);
    correct += sample_correct;
    total += static_cast<long long>(ps.steps.size());
  }
  return total == 0 ? 0.0
                    : static_cast<double>(correct) / static_cast<double>(total);
}

double selection_nll(const std::vector<Sample>& samples,
                     const std::vector<TaskAog>& catalog,
                     const AogPlannerParams& params,
                     const grammar::AogEncodingLayout& enc_layout,
                     const world::SceneLayout& scene_layout) {
  double loss = 0.0;
  long long steps = 0;
  for (const Sample& s : samples) {
    if (s.selections.empty()) continue;
    PreppedSample ps = prep_sample(s, catalog, enc_layout, scene_layout);
    auto [l, n] = run_sample(ps, params, nullptr);
    loss += l;
    steps += n;
  }
  return steps == 0 ? 0.0 : loss / static_cast<double>(steps);
}

}  // namespace aogplan::planner
