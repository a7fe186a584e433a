#pragma once

// Atomic-action sequence planner. Shares the scene/task trunk with the
// or-node selector; each step embeds the previous atomic action (two
// concatenated one-hots), advances the LSTM and predicts the next primitive
// action and object through two independent softmax heads. An alternative
// joint head scores whole atomic actions over the pair vocabulary observed
// in the task catalog; it exists for the ablation only.
//
// Training minimizes the per-step action+object NLL over the annotated set
// plus, under the curriculum schedule, every generated sample whose
// uncertainty sits below the epoch's threshold.

#include <optional>
#include <span>

#include "aogplan/catalog.hpp"
#include "aogplan/dataset.hpp"
#include "aogplan/nn/checkpoint.hpp"
#include "aogplan/nn/optim.hpp"
#include "aogplan/nn/recurrent.hpp"
#include "aogplan/aog_planner.hpp"  // EpochStats / TrainLog

namespace aogplan::planner {

inline constexpr int kPairEncodingDim =
    vocab::kNumActionClasses + vocab::kNumObjectClasses;
inline constexpr int kDefaultMaxDecodeLen = 20;

// Atomic-action vocabulary for the joint head: every distinct leaf pair in
// the catalog plus the three special pairs.
struct AtomicVocab {
  std::vector<AtomicAction> pairs;

  static AtomicVocab from_catalog(const std::vector<grammar::TaskAog>& catalog);
  int id_of(const AtomicAction& a) const;  // -1 if absent
  int size() const { return static_cast<int>(pairs.size()); }
};

struct ActionPlannerDims {
  int scene_dim = 0;
  int task_dim = vocab::kNumTasks;
  int embed = 64;
  int hidden = 64;
  int joint_vocab = 0;  // 0 = factorized heads
  bool joint() const { return joint_vocab > 0; }
};

struct ActionPlannerParams {
  ActionPlannerDims dims;
  nn::Tensor W_fI, W_fT, W_hf;
  nn::Tensor W_emb;  // pair encoding -> LSTM input
  nn::LstmCellParams lstm;
  nn::Tensor W_ah, b_a;  // primitive-action head
  nn::Tensor W_oh, b_o;  // object head
  nn::Tensor W_jh, b_j;  // joint head (ablation)
  AtomicVocab joint_pairs;

  void resize(const ActionPlannerDims& d);
  void init(Rng& rng);
  std::vector<nn::ParamRef> registry();
  std::string meta_json() const;

  static ActionPlannerParams sized_like(const ActionPlannerDims& d) {
    ActionPlannerParams p;
    p.resize(d);
    return p;
  }
};

struct CurriculumSchedule {
  double tau_init = 0.2;
  double tau_step = 0.2;
  int epochs_per_step = 100;
  double tau_max = 1.2;

  double tau(int epoch) const {
    const double t = tau_init + tau_step * (epoch / epochs_per_step);
    return t < tau_max ? t : tau_max;
  }
};

struct ActionTrainOptions {
  nn::SgdConfig sgd;
  int epochs = 300;
  double val_fraction = 0.1;
  std::uint64_t seed = 7;
  bool curriculum = true;  // false: admit every generated sample from epoch 0
  CurriculumSchedule schedule;
};

// Summed teacher-forced per-step NLL (action + object terms, or the joint
// term) over the samples, with the stop pair appended to each sequence.
// Accumulates gradients when `grads` is non-null; exposed for gradient
// verification.
double teacher_forced_loss(const std::vector<world::Sample>& samples,
                           const world::SceneLayout& scene_layout,
                           const ActionPlannerParams& params,
                           ActionPlannerParams* grads = nullptr);

// Curriculum training over annotated + generated samples; returns the
// best-validation checkpoint. Passing an empty generated set reduces the
// objective to the plain annotated NLL.
ActionPlannerParams train_action_planner(
    const std::vector<world::Sample>& annotated,
    const std::vector<world::Sample>& generated,
    const world::SceneLayout& scene_layout, const ActionPlannerDims& dims,
    const ActionTrainOptions& options, TrainLog* log = nullptr);

// Ablation variant: one softmax over the catalog's atomic-action vocabulary
// instead of the two factorized heads; everything else is identical.
ActionPlannerParams train_action_planner_joint(
    const std::vector<world::Sample>& annotated,
    const std::vector<world::Sample>& generated,
    const std::vector<grammar::TaskAog>& catalog,
    const world::SceneLayout& scene_layout, ActionPlannerDims dims,
    const ActionTrainOptions& options, TrainLog* log = nullptr);

struct DecodeResult {
  std::vector<AtomicAction> sequence;
  bool truncated = false;    // hit l_max before a stop
  double mean_entropy = 0.0; // mean of the two head entropies per step
};

// Greedy decode from (start, start); stops on (stop, stop) (excluded from
// the result) or on (task fail, task fail) (kept, then halt), or after
// l_max steps. Argmax ties break toward the lowest index.
DecodeResult decode(const world::Scene& scene, int task_id,
                    const ActionPlannerParams& params,
                    const world::SceneLayout& scene_layout,
                    int l_max = kDefaultMaxDecodeLen);

// Same decode on precomputed scene features (e.g. noise-corrupted scores).
DecodeResult decode_features(std::span<const double> f_scene, int task_id,
                             const ActionPlannerParams& params,
                             int l_max = kDefaultMaxDecodeLen);

// Teacher-forced log p(sequence | scene, task); the stop pair is appended
// internally. Always <= 0.
double sequence_logprob(const world::Scene& scene, int task_id,
                        const std::vector<AtomicAction>& sequence,
                        const ActionPlannerParams& params,
                        const world::SceneLayout& scene_layout);

void save_action_planner(const std::filesystem::path& path,
                         ActionPlannerParams& params);
ActionPlannerParams load_action_planner(const std::filesystem::path& path);

}  // namespace aogplan::planner
