#include "aogplan/noise.hpp"

#include <algorithm>

namespace aogplan::world {

namespace {

struct Segment {
  int offset;
  int width;
};

// One-hot segments inside a 25-real object block.
constexpr Segment kSegments[] = {
    {0, vocab::kNumObjects},
    {vocab::kNumObjects, 3},
    {vocab::kNumObjects + 3, 3},
    {vocab::kNumObjects + 6, 3},
};

}  // namespace

PerturbResult perturb_features(const std::vector<double>& features,
                               double sigma, Rng& rng,
                               const SceneLayout& layout) {
  PerturbResult result;
  result.features = features;
  if (static_cast<int>(features.size()) != layout.scene_feat_dim()) {
    throw WorldError("perturb: feature size does not match layout");
  }

  for (int slot = 0; slot < layout.m_max; ++slot) {
    double* block = result.features.data() +
                    static_cast<size_t>(slot) * SceneLayout::kObjectFeatDim;
    bool occupied = false;
    for (int k = 0; k < vocab::kNumObjects; ++k) {
      if (block[k] != 0.0) occupied = true;
    }
    if (!occupied) continue;
    for (const Segment& seg : kSegments) {
      double* v = block + seg.offset;
      int truth = static_cast<int>(std::max_element(v, v + seg.width) - v);
      if (sigma > 0.0) {
        for (int i = 0; i < seg.width; ++i) v[i] += rng.normal(0.0, sigma);
      }
      int argmax = static_cast<int>(std::max_element(v, v + seg.width) - v);
      result.segments++;
      if (argmax != truth) result.negative_segments++;
    }
  }
  result.negative = result.negative_segments > 0;
  return result;
}

double measure_negative_ratio(const std::vector<Scene>& scenes, double sigma,
                              const SceneLayout& layout, std::uint64_t seed) {
  long long segments = 0;
  long long negatives = 0;
  for (size_t i = 0; i < scenes.size(); ++i) {
    Rng rng = Rng::derive(seed, "noise", i);
    const auto f = encode_scene(scenes[i], layout);
    const auto r = perturb_features(f, sigma, rng, layout);
    segments += r.segments;
    negatives += r.negative_segments;
  }
  return segments == 0 ? 0.0 : static_cast<double>(negatives) /
                                   static_cast<double>(segments);
}

double calibrate_sigma(const std::vector<Scene>& scenes, double target,
                       const SceneLayout& layout, std::uint64_t seed,
                       double tolerance) {
  double lo = 0.0, hi = 0.5;
  while (measure_negative_ratio(scenes, hi, layout, seed) < target) {
    hi *= 2.0;
    if (hi > 64.0) throw WorldError("calibrate_sigma: target unreachable");
  }
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double ratio = measure_negative_ratio(scenes, mid, layout, seed);
    if (std::abs(ratio - target) <= tolerance) return mid;
    (ratio < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace aogplan::world
