#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace aogplan::nn {

// Dense row-major tensor of 64-bit reals. Rank is 1 or 2 everywhere in this
// project; the shape stays a list so checkpoints remain self-describing.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::initializer_list<std::size_t> dims) { resize(dims); }

  void resize(std::initializer_list<std::size_t> dims) {
    shape.assign(dims);
    v.assign(numel_of(shape), 0.0);
  }

  static Tensor zeros(std::initializer_list<std::size_t> dims) {
    return Tensor(dims);
  }

  static std::size_t numel_of(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<>());
  }

  std::size_t numel() const { return v.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t i, std::size_t j) {
    assert(shape.size() == 2 && i < shape[0] && j < shape[1]);
    return v[i * shape[1] + j];
  }
  double at(std::size_t i, std::size_t j) const {
    assert(shape.size() == 2 && i < shape[0] && j < shape[1]);
    return v[i * shape[1] + j];
  }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }

  void fill(double value) { std::fill(v.begin(), v.end(), value); }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  void check_finite(const char* what) const {
#ifndef NDEBUG
    for (double x : v) {
      if (!std::isfinite(x)) {
        throw std::runtime_error(std::string("non-finite value in ") + what);
      }
    }
#else
    (void)what;
#endif
  }
};

// Named view over a parameter (or gradient) tensor; the order of a
// registry is part of the checkpoint and optimizer-state contract.
struct ParamRef {
  std::string name;
  Tensor* tensor;
};

}  // namespace aogplan::nn
