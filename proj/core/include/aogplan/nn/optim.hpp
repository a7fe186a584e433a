#pragma once

// SGD with momentum and weight decay in the Caffe form:
//   v <- momentum * v - lr * (g + weight_decay * w);  w <- w + v
// plus the fan-based uniform initializer used by every layer.

#include <vector>

#include "aogplan/nn/tensor.hpp"
#include "aogplan/rng.hpp"

namespace aogplan::nn {

struct SgdConfig {
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  int batch_size = 40;
};

class SgdState {
 public:
  // Builds zeroed momentum buffers matching the parameter registry.
  explicit SgdState(const std::vector<ParamRef>& params);

  // Applies one update. `grads` must mirror the registry the state was
  // built from, in the same order.
  void step(const std::vector<ParamRef>& params,
            const std::vector<ParamRef>& grads, const SgdConfig& cfg);

 private:
  std::vector<Tensor> velocity_;
};

// Weights ~ uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
void init_uniform_fan(Rng& rng, Tensor& t, std::size_t fan_in,
                      std::size_t fan_out);

// Weight matrices get fan-based uniform init with their own dims as fans;
// biases stay zero except the LSTM forget-gate rows, set to 1.
struct LstmCellParams;
void zero_grads(const std::vector<ParamRef>& grads);

}  // namespace aogplan::nn
