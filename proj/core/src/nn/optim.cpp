#include "aogplan/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace aogplan::nn {

SgdState::SgdState(const std::vector<ParamRef>& params) {
  velocity_.reserve(params.size());
  for (const ParamRef& p : params) {
    Tensor v;
    v.shape = p.tensor->shape;
    v.v.assign(p.tensor->numel(), 0.0);
    velocity_.push_back(std::move(v));
  }
}

void SgdState::step(const std::vector<ParamRef>& params,
                    const std::vector<ParamRef>& grads, const SgdConfig& cfg) {
  if (params.size() != velocity_.size() || grads.size() != params.size()) {
    throw std::invalid_argument("sgd: registry mismatch");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& w = *params[k].tensor;
    const Tensor& g = *grads[k].tensor;
    Tensor& v = velocity_[k];
    if (!w.same_shape(g) || w.numel() != v.numel()) {
      throw std::invalid_argument("sgd: shape mismatch at " + params[k].name);
    }
    for (std::size_t i = 0; i < w.numel(); ++i) {
      v.v[i] = cfg.momentum * v.v[i] -
               cfg.lr * (g.v[i] + cfg.weight_decay * w.v[i]);
      w.v[i] += v.v[i];
    }
  }
}

void init_uniform_fan(Rng& rng, Tensor& t, std::size_t fan_in,
                      std::size_t fan_out) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& x : t.v) x = rng.uniform(-a, a);
}

void zero_grads(const std::vector<ParamRef>& grads) {
  for (const ParamRef& g : grads) g.tensor->fill(0.0);
}

}  // namespace aogplan::nn
