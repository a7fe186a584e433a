#pragma once

// Recurrent cells with explicit forward caches and accumulating backward
// passes. The LSTM uses the standard four-gate cell with gate rows ordered
// (input, forget, cell-candidate, output) inside the stacked weight
// matrices.

#include <span>
#include <vector>

#include "aogplan/nn/tensor.hpp"

namespace aogplan::nn {

struct LstmCellParams {
  Tensor Wx;  // (4h x d)
  Tensor Wh;  // (4h x h)
  Tensor b;   // (4h)

  void resize(std::size_t input_dim, std::size_t hidden_dim) {
    Wx.resize({4 * hidden_dim, input_dim});
    Wh.resize({4 * hidden_dim, hidden_dim});
    b.resize({4 * hidden_dim});
  }
  std::size_t hidden_dim() const { return Wh.cols(); }
  std::size_t input_dim() const { return Wx.cols(); }
};

struct LstmStepCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> i, f, g, o;  // post-activation gates
  std::vector<double> c, tanh_c, h;
};

// (h_t, c_t) from (x_t, h_{t-1}, c_{t-1}); the cache feeds the backward pass.
void lstm_step(const LstmCellParams& params, std::span<const double> x,
               std::span<const double> h_prev, std::span<const double> c_prev,
               LstmStepCache& cache);

// Consumes d h_t and d c_t; accumulates parameter gradients and writes the
// gradients flowing to x_t, h_{t-1} and c_{t-1}.
void lstm_step_backward(const LstmCellParams& params, const LstmStepCache& cache,
                        std::span<const double> dh, std::span<const double> dc,
                        LstmCellParams& grads, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev);

// Plain tanh recurrence, used by the RNN baseline: h_t = tanh(Wx x + Wh h + b).
struct TanhCellParams {
  Tensor Wx;  // (h x d)
  Tensor Wh;  // (h x h)
  Tensor b;   // (h)

  void resize(std::size_t input_dim, std::size_t hidden_dim) {
    Wx.resize({hidden_dim, input_dim});
    Wh.resize({hidden_dim, hidden_dim});
    b.resize({hidden_dim});
  }
  std::size_t hidden_dim() const { return Wh.cols(); }
};

struct TanhStepCache {
  std::vector<double> x, h_prev, h;
};

void tanh_step(const TanhCellParams& params, std::span<const double> x,
               std::span<const double> h_prev, TanhStepCache& cache);

void tanh_step_backward(const TanhCellParams& params, const TanhStepCache& cache,
                        std::span<const double> dh, TanhCellParams& grads,
                        std::span<double> dx, std::span<double> dh_prev);

}  // namespace aogplan::nn
