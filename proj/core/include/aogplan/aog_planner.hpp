#pragma once

// Recurrent or-node selector. Scene and task features are embedded with two
// ReLU layers, concatenated and mapped to the initial LSTM hidden state; the
// memory cell starts at zero. Each step embeds the current (pruned) graph
// encoding, advances the LSTM and scores up to three branches; two-branch
// nodes are scored with the third class masked to probability zero.
//
// Training teacher-forces the annotated branch and prunes with it; sample
// generation prunes with the argmax branch and reports the mean branch
// entropy as the sample's uncertainty.

#include <span>

#include "aogplan/aog_encoding.hpp"
#include "aogplan/dataset.hpp"
#include "aogplan/nn/checkpoint.hpp"
#include "aogplan/nn/optim.hpp"
#include "aogplan/nn/recurrent.hpp"

namespace aogplan::planner {

struct AogPlannerDims {
  int scene_dim = 0;
  int task_dim = vocab::kNumTasks;
  int aog_dim = 0;
  int embed = 64;
  int hidden = 64;
};

struct AogPlannerParams {
  AogPlannerDims dims;
  nn::Tensor W_fI, W_fT;   // scene / task embeddings
  nn::Tensor W_hf;         // concat embedding -> h_0
  nn::Tensor W_emb;        // graph encoding -> LSTM input
  nn::LstmCellParams lstm;
  nn::Tensor W_hp, b_p;    // hidden -> branch logits (B = 3)

  void resize(const AogPlannerDims& d);
  void init(Rng& rng);
  std::vector<nn::ParamRef> registry();
  std::string meta_json() const;

  static AogPlannerParams sized_like(const AogPlannerDims& d) {
    AogPlannerParams p;
    p.resize(d);
    return p;
  }
};

// (h_0, c_0) for a (scene, task) pair; c_0 is always the zero vector.
struct InitState {
  std::vector<double> h0, c0;
  std::vector<double> scene_act, task_act;  // post-ReLU, kept for backward
};
InitState init_state(std::span<const double> f_scene,
                     std::span<const double> f_task,
                     const AogPlannerParams& params);

// One selection step on an explicit state; p has kMaxBranches entries with
// invalid branches at exactly zero.
struct SelectStep {
  std::vector<double> p;
  int branch = 0;
  double branch_entropy = 0.0;
};
SelectStep select_step(std::vector<double>& h, std::vector<double>& c,
                       std::span<const double> aog_encoding,
                       const AogPlannerParams& params, int valid_branches);

struct AogTrainOptions {
  nn::SgdConfig sgd;
  int epochs = 300;
  double val_fraction = 0.1;
  std::uint64_t seed = 7;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double tau = 0.0;        // curriculum threshold (action planner only)
  int included = 0;        // generated samples admitted this epoch
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  int best_epoch = -1;
  std::string to_csv() const;
};

// Summed teacher-forced NLL over the samples' selection steps; accumulates
// parameter gradients when `grads` is non-null. Exposed so tests can verify
// the analytic gradients against finite differences.
double teacher_forced_loss(const std::vector<world::Sample>& samples,
                           const std::vector<grammar::TaskAog>& catalog,
                           const grammar::AogEncodingLayout& enc_layout,
                           const world::SceneLayout& scene_layout,
                           const AogPlannerParams& params,
                           AogPlannerParams* grads = nullptr);

// Teacher-forced training on annotated samples (Eq.-style NLL over all
// or-nodes); returns the best-validation checkpoint.
AogPlannerParams train_aog_planner(const std::vector<world::Sample>& annotated,
                                   const std::vector<grammar::TaskAog>& catalog,
                                   const grammar::AogEncodingLayout& enc_layout,
                                   const world::SceneLayout& scene_layout,
                                   const AogPlannerDims& dims,
                                   const AogTrainOptions& options,
                                   TrainLog* log = nullptr);

// Free-running generation for one (scene, task); selections follow the
// argmax branch and the graph is re-encoded after every prune.
world::Sample generate_sample(const world::Scene& scene,
                              const grammar::TaskAog& task,
                              const AogPlannerParams& params,
                              const grammar::AogEncodingLayout& enc_layout,
                              const world::SceneLayout& scene_layout);

// Runs generate_sample over the pool; duplicates of annotated (scene, task)
// pairs are dropped.
std::vector<world::Sample> augment(const std::vector<world::PoolEntry>& pool,
                                   const std::vector<grammar::TaskAog>& catalog,
                                   const AogPlannerParams& params,
                                   const grammar::AogEncodingLayout& enc_layout,
                                   const world::SceneLayout& scene_layout,
                                   const std::vector<world::Sample>& annotated);

// Teacher-forced per-node selection accuracy over the samples' stored
// selection steps.
double selection_accuracy(const std::vector<world::Sample>& samples,
                          const std::vector<grammar::TaskAog>& catalog,
                          const AogPlannerParams& params,
                          const grammar::AogEncodingLayout& enc_layout,
                          const world::SceneLayout& scene_layout);

// Mean per-node NLL of the annotated selections (teacher forced).
double selection_nll(const std::vector<world::Sample>& samples,
                     const std::vector<grammar::TaskAog>& catalog,
                     const AogPlannerParams& params,
                     const grammar::AogEncodingLayout& enc_layout,
                     const world::SceneLayout& scene_layout);

void save_aog_planner(const std::filesystem::path& path,
                      AogPlannerParams& params);
AogPlannerParams load_aog_planner(const std::filesystem::path& path);

}  // namespace aogplan::planner
