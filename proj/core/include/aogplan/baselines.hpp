#pragma once

// The three reference baselines:
//  - nearest neighbor: retrieves the closest same-task training scene by
//    Euclidean distance on scene features and replays its sequence;
//  - MLP: two stacked fully connected layers over scene/task features plus a
//    fixed window of the five most recent atomic actions, iterated until a
//    stop signal;
//  - RNN: the action-planner pipeline with a plain tanh recurrence in place
//    of the LSTM cell.

#include "aogplan/action_planner.hpp"
#include "aogplan/dataset.hpp"
#include "aogplan/nn/recurrent.hpp"

namespace aogplan::eval {

class NearestNeighborBaseline {
 public:
  NearestNeighborBaseline(const std::vector<world::Sample>& train,
                          const world::SceneLayout& layout);

  // Throws std::invalid_argument when the task has no training samples.
  std::vector<AtomicAction> predict(const world::Scene& scene,
                                    int task_id) const;
  bool covers_task(int task_id) const;

 private:
  struct Entry {
    std::vector<double> features;
    int task_id;
    std::vector<AtomicAction> sequence;
  };
  std::vector<Entry> entries_;
  world::SceneLayout layout_;
};

inline constexpr int kMlpHistoryWindow = 5;

struct MlpBaselineParams {
  int scene_dim = 0;
  int task_dim = vocab::kNumTasks;
  int hidden = 64;
  nn::Tensor W1, b1;     // input -> hidden, ReLU
  nn::Tensor W_ah, b_a;  // hidden -> actions
  nn::Tensor W_oh, b_o;  // hidden -> objects

  int input_dim() const {
    return scene_dim + task_dim +
           kMlpHistoryWindow * planner::kPairEncodingDim;
  }
  void resize(int scene_dim_, int task_dim_, int hidden_);
  void init(Rng& rng);
  std::vector<nn::ParamRef> registry();
};

MlpBaselineParams train_mlp_baseline(const std::vector<world::Sample>& train,
                                     const world::SceneLayout& layout,
                                     int hidden,
                                     const planner::ActionTrainOptions& options);

planner::DecodeResult decode_mlp(const world::Scene& scene, int task_id,
                                 const MlpBaselineParams& params,
                                 const world::SceneLayout& layout,
                                 int l_max = planner::kDefaultMaxDecodeLen);

struct RnnBaselineParams {
  planner::ActionPlannerDims dims;
  nn::Tensor W_fI, W_fT, W_hf;
  nn::Tensor W_emb;
  nn::TanhCellParams cell;
  nn::Tensor W_ah, b_a, W_oh, b_o;

  void resize(const planner::ActionPlannerDims& d);
  void init(Rng& rng);
  std::vector<nn::ParamRef> registry();
};

RnnBaselineParams train_rnn_baseline(const std::vector<world::Sample>& train,
                                     const world::SceneLayout& layout,
                                     const planner::ActionPlannerDims& dims,
                                     const planner::ActionTrainOptions& options);

planner::DecodeResult decode_rnn(const world::Scene& scene, int task_id,
                                 const RnnBaselineParams& params,
                                 const world::SceneLayout& layout,
                                 int l_max = planner::kDefaultMaxDecodeLen);

// One tanh recurrence step on explicit state; exposed for tests.
std::vector<double> rnn_cell_step(const nn::TanhCellParams& cell,
                                  std::span<const double> x,
                                  std::span<const double> h_prev);

}  // namespace aogplan::eval
