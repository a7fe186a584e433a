#pragma once

// Forward and backward kernels for the handful of ops both planners are
// built from. Backward functions accumulate into their gradient outputs so
// BPTT can sum contributions across time steps.

#include <span>
#include <vector>

#include "aogplan/nn/tensor.hpp"

namespace aogplan::nn {

inline constexpr double kProbFloor = 1e-12;

// y = W x (+ b). W is (out x in); b may be empty for bias-free layers.
void linear(const Tensor& W, std::span<const double> x, const Tensor& b,
            std::span<double> y);
void linear(const Tensor& W, std::span<const double> x, std::span<double> y);

// Accumulates dW += dy x^T, db += dy, and dx += W^T dy (dx may be empty when
// the input is data).
void linear_backward(const Tensor& W, std::span<const double> x,
                     std::span<const double> dy, Tensor& dW, Tensor* db,
                     std::span<double> dx);

void relu(std::span<const double> x, std::span<double> y);
// dx += dy where the forward output was positive.
void relu_backward(std::span<const double> y, std::span<const double> dy,
                   std::span<double> dx);

// Max-subtracted softmax; writes a distribution (sums to 1).
void softmax(std::span<const double> logits, std::span<double> p);

// Softmax over logits[0..valid); entries at and past `valid` get exactly 0.
void masked_softmax(std::span<const double> logits, int valid,
                    std::span<double> p);

// -log p[target] with the probability floored at kProbFloor.
double cross_entropy(std::span<const double> p, int target);

// Gradient of cross_entropy(softmax(logits), target) w.r.t. logits, i.e.
// p - onehot(target); entries past `valid` get 0. Accumulates into dlogits.
void softmax_xent_backward(std::span<const double> p, int target, int valid,
                           std::span<double> dlogits);

// Shannon entropy (natural log) of a distribution.
double entropy(std::span<const double> p);

int argmax(std::span<const double> p);

}  // namespace aogplan::nn
