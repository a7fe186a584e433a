#include "aogplan/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace aogplan::nn {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void linear(const Tensor& W, std::span<const double> x, const Tensor& b,
            std::span<double> y) {
  const std::size_t out = W.rows(), in = W.cols();
  require(x.size() == in, "linear: input size mismatch");
  require(y.size() == out, "linear: output size mismatch");
  require(b.numel() == 0 || b.numel() == out, "linear: bias size mismatch");
  const double* __restrict w = W.v.data();
  const double* __restrict xp = x.data();
  for (std::size_t i = 0; i < out; ++i) {
    const double* __restrict row = w + i * in;
    double s = b.numel() ? b.v[i] : 0.0;
    for (std::size_t j = 0; j < in; ++j) s += row[j] * xp[j];
    y[i] = s;
  }
}

void linear(const Tensor& W, std::span<const double> x, std::span<double> y) {
  static const Tensor kNoBias;
  linear(W, x, kNoBias, y);
}

void linear_backward(const Tensor& W, std::span<const double> x,
                     std::span<const double> dy, Tensor& dW, Tensor* db,
                     std::span<double> dx) {
  const std::size_t out = W.rows(), in = W.cols();
  require(dy.size() == out && x.size() == in, "linear_backward: size mismatch");
  require(dW.same_shape(W), "linear_backward: dW shape mismatch");
  double* __restrict dwp = dW.v.data();
  const double* __restrict xp = x.data();
  for (std::size_t i = 0; i < out; ++i) {
    const double g = dy[i];
    if (g == 0.0) continue;
    double* __restrict drow = dwp + i * in;
    for (std::size_t j = 0; j < in; ++j) drow[j] += g * xp[j];
  }
  if (db) {
    require(db->numel() == out, "linear_backward: db size mismatch");
    for (std::size_t i = 0; i < out; ++i) db->v[i] += dy[i];
  }
  if (!dx.empty()) {
    require(dx.size() == in, "linear_backward: dx size mismatch");
    const double* __restrict w = W.v.data();
    double* __restrict dxp = dx.data();
    for (std::size_t i = 0; i < out; ++i) {
      const double g = dy[i];
      if (g == 0.0) continue;
      const double* __restrict row = w + i * in;
      for (std::size_t j = 0; j < in; ++j) dxp[j] += row[j] * g;
    }
  }
}

void relu(std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "relu: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(std::span<const double> y, std::span<const double> dy,
                   std::span<double> dx) {
  require(y.size() == dy.size() && y.size() == dx.size(),
          "relu_backward: size mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0) dx[i] += dy[i];
  }
}

void softmax(std::span<const double> logits, std::span<double> p) {
  masked_softmax(logits, static_cast<int>(logits.size()), p);
}

void masked_softmax(std::span<const double> logits, int valid,
                    std::span<double> p) {
  require(logits.size() == p.size(), "softmax: size mismatch");
  require(valid >= 1 && valid <= static_cast<int>(logits.size()),
          "softmax: bad valid count");
  double max_logit = logits[0];
  for (int i = 1; i < valid; ++i) max_logit = std::max(max_logit, logits[i]);
  double z = 0.0;
  for (int i = 0; i < valid; ++i) {
    p[i] = std::exp(logits[i] - max_logit);
    z += p[i];
  }
  for (int i = 0; i < valid; ++i) p[i] /= z;
  for (std::size_t i = static_cast<std::size_t>(valid); i < p.size(); ++i) {
    p[i] = 0.0;
  }
}

double cross_entropy(std::span<const double> p, int target) {
  require(target >= 0 && target < static_cast<int>(p.size()),
          "cross_entropy: bad target");
  return -std::log(std::max(p[static_cast<std::size_t>(target)], kProbFloor));
}

void softmax_xent_backward(std::span<const double> p, int target, int valid,
                           std::span<double> dlogits) {
  require(p.size() == dlogits.size(), "xent backward: size mismatch");
  for (int i = 0; i < valid; ++i) {
    dlogits[i] += p[i] - (i == target ? 1.0 : 0.0);
  }
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double q : p) {
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

int argmax(std::span<const double> p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

}  // namespace aogplan::nn
