#include "aogplan/nn/recurrent.hpp"

#include <cmath>

#include "aogplan/nn/ops.hpp"

namespace aogplan::nn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void lstm_step(const LstmCellParams& params, std::span<const double> x,
               std::span<const double> h_prev, std::span<const double> c_prev,
               LstmStepCache& cache) {
  const std::size_t h = params.hidden_dim();
  cache.x.assign(x.begin(), x.end());
  cache.h_prev.assign(h_prev.begin(), h_prev.end());
  cache.c_prev.assign(c_prev.begin(), c_prev.end());

  std::vector<double> pre(4 * h, 0.0);
  linear(params.Wx, x, params.b, pre);
  std::vector<double> rec(4 * h, 0.0);
  linear(params.Wh, h_prev, rec);
  for (std::size_t k = 0; k < 4 * h; ++k) pre[k] += rec[k];

  cache.i.resize(h);
  cache.f.resize(h);
  cache.g.resize(h);
  cache.o.resize(h);
  cache.c.resize(h);
  cache.tanh_c.resize(h);
  cache.h.resize(h);
  for (std::size_t k = 0; k < h; ++k) {
    cache.i[k] = sigmoid(pre[k]);
    cache.f[k] = sigmoid(pre[h + k]);
    cache.g[k] = std::tanh(pre[2 * h + k]);
    cache.o[k] = sigmoid(pre[3 * h + k]);
    cache.c[k] = cache.f[k] * cache.c_prev[k] + cache.i[k] * cache.g[k];
    cache.tanh_c[k] = std::tanh(cache.c[k]);
    cache.h[k] = cache.o[k] * cache.tanh_c[k];
  }
}

void lstm_step_backward(const LstmCellParams& params, const LstmStepCache& cache,
                        std::span<const double> dh, std::span<const double> dc,
                        LstmCellParams& grads, std::span<double> dx,
                        std::span<double> dh_prev, std::span<double> dc_prev) {
  const std::size_t h = params.hidden_dim();
  std::vector<double> dpre(4 * h);
  for (std::size_t k = 0; k < h; ++k) {
    const double do_ = dh[k] * cache.tanh_c[k];
    const double dct =
        dc[k] + dh[k] * cache.o[k] * (1.0 - cache.tanh_c[k] * cache.tanh_c[k]);
    const double di = dct * cache.g[k];
    const double df = dct * cache.c_prev[k];
    const double dg = dct * cache.i[k];
    dc_prev[k] = dct * cache.f[k];
    dpre[k] = di * cache.i[k] * (1.0 - cache.i[k]);
    dpre[h + k] = df * cache.f[k] * (1.0 - cache.f[k]);
    dpre[2 * h + k] = dg * (1.0 - cache.g[k] * cache.g[k]);
    dpre[3 * h + k] = do_ * cache.o[k] * (1.0 - cache.o[k]);
  }
  // Parameter gradients accumulate; the dx/dh_prev/dc_prev outputs are
  // overwritten for the caller to chain into the previous step.
  std::fill(dx.begin(), dx.end(), 0.0);
  linear_backward(params.Wx, cache.x, dpre, grads.Wx, &grads.b, dx);
  std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
  linear_backward(params.Wh, cache.h_prev, dpre, grads.Wh, nullptr, dh_prev);
}

void tanh_step(const TanhCellParams& params, std::span<const double> x,
               std::span<const double> h_prev, TanhStepCache& cache) {
  const std::size_t h = params.hidden_dim();
  cache.x.assign(x.begin(), x.end());
  cache.h_prev.assign(h_prev.begin(), h_prev.end());
  std::vector<double> pre(h, 0.0);
  linear(params.Wx, x, params.b, pre);
  std::vector<double> rec(h, 0.0);
  linear(params.Wh, h_prev, rec);
  cache.h.resize(h);
  for (std::size_t k = 0; k < h; ++k) cache.h[k] = std::tanh(pre[k] + rec[k]);
}

void tanh_step_backward(const TanhCellParams& params, const TanhStepCache& cache,
                        std::span<const double> dh, TanhCellParams& grads,
                        std::span<double> dx, std::span<double> dh_prev) {
  const std::size_t h = params.hidden_dim();
  std::vector<double> dpre(h);
  for (std::size_t k = 0; k < h; ++k) {
    dpre[k] = dh[k] * (1.0 - cache.h[k] * cache.h[k]);
  }
  std::fill(dx.begin(), dx.end(), 0.0);
  linear_backward(params.Wx, cache.x, dpre, grads.Wx, &grads.b, dx);
  std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
  linear_backward(params.Wh, cache.h_prev, dpre, grads.Wh, nullptr, dh_prev);
}

}  // namespace aogplan::nn
