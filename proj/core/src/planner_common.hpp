#pragma once

// Internal helpers shared by the two planner implementations: the
// scene/task feature trunk (two ReLU embeddings concatenated and mapped to
// the initial hidden state) and its backward pass.

#include <span>
#include <vector>

#include "aogplan/nn/ops.hpp"
#include "aogplan/nn/tensor.hpp"

namespace aogplan::planner::detail {

struct TrunkCache {
  std::vector<double> scene_act, task_act;  // post-ReLU embeddings
  std::vector<double> f_it;                 // concatenation
  std::vector<double> h0;
};

inline void trunk_forward(const nn::Tensor& W_fI, const nn::Tensor& W_fT,
                          const nn::Tensor& W_hf,
                          std::span<const double> f_scene,
                          std::span<const double> f_task, TrunkCache& cache) {
  const std::size_t e = W_fI.rows();
  const std::size_t h = W_hf.rows();
  std::vector<double> pre(e);
  cache.scene_act.resize(e);
  nn::linear(W_fI, f_scene, pre);
  nn::relu(pre, cache.scene_act);
  cache.task_act.resize(e);
  nn::linear(W_fT, f_task, pre);
  nn::relu(pre, cache.task_act);
  cache.f_it.resize(2 * e);
  std::copy(cache.scene_act.begin(), cache.scene_act.end(), cache.f_it.begin());
  std::copy(cache.task_act.begin(), cache.task_act.end(),
            cache.f_it.begin() + static_cast<std::ptrdiff_t>(e));
  cache.h0.resize(h);
  nn::linear(W_hf, cache.f_it, cache.h0);
}

inline void trunk_backward(const nn::Tensor& W_fI, const nn::Tensor& W_fT,
                           const nn::Tensor& W_hf, const TrunkCache& cache,
                           std::span<const double> f_scene,
                           std::span<const double> f_task,
                           std::span<const double> dh0, nn::Tensor& dW_fI,
                           nn::Tensor& dW_fT, nn::Tensor& dW_hf) {
  const std::size_t e = W_fI.rows();
  std::vector<double> df_it(2 * e, 0.0);
  nn::linear_backward(W_hf, cache.f_it, dh0, dW_hf, nullptr, df_it);
  std::vector<double> d_scene(e, 0.0), d_task(e, 0.0);
  nn::relu_backward(cache.scene_act, {df_it.data(), e}, d_scene);
  nn::relu_backward(cache.task_act, {df_it.data() + e, e}, d_task);
  nn::linear_backward(W_fI, f_scene, d_scene, dW_fI, nullptr, {});
  nn::linear_backward(W_fT, f_task, d_task, dW_fT, nullptr, {});
}

}  // namespace aogplan::planner::detail
