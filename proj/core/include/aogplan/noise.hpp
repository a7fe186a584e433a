#pragma once

// Gaussian corruption of scene features. Noise lands only on the one-hot
// segments (class label and the three attribute states) of real objects;
// bbox entries and padding blocks stay untouched. A segment counts as
// negative when its argmax no longer sits on the ground-truth bit.

#include <vector>

#include "aogplan/rng.hpp"
#include "aogplan/scene.hpp"

namespace aogplan::world {

struct PerturbResult {
  std::vector<double> features;
  int segments = 0;           // one-hot segments eligible for noise
  int negative_segments = 0;  // segments whose argmax moved
  bool negative = false;      // any segment negative
};

// Occupied slots are recognized by their set class bit; empty (padding)
// slots stay untouched.
PerturbResult perturb_features(const std::vector<double>& features,
                               double sigma, Rng& rng,
                               const SceneLayout& layout);

// Fraction of negative segments over all scenes at a given sigma.
double measure_negative_ratio(const std::vector<Scene>& scenes, double sigma,
                              const SceneLayout& layout, std::uint64_t seed);

// Bisects sigma until the measured negative ratio is within `tolerance` of
// `target` over the provided scenes.
double calibrate_sigma(const std::vector<Scene>& scenes, double target,
                       const SceneLayout& layout, std::uint64_t seed,
                       double tolerance = 0.002);

}  // namespace aogplan::world
