#include "aogplan/scene_gen.hpp"

#include <array>

namespace aogplan::world {

namespace {

// Rows: lab, dormitory, kitchen, office, living room, balcony, corridor.
// Columns follow the object vocabulary:
//   cup  pot  disp tea  water bowl eras board mach teap cloth clos
// Each environment has a stable furniture set (probabilities near 0 or 1)
// plus a few genuinely optional classes; most scene-to-scene variation comes
// from attribute states rather than object composition.
constexpr double kPresence[kNumEnvironments][vocab::kNumObjects] = {
    {0.97, 0.10, 0.60, 0.40, 0.02, 0.10, 0.97, 0.97, 0.02, 0.10, 0.02, 0.05},
    {0.90, 0.10, 0.30, 0.20, 0.02, 0.10, 0.05, 0.05, 0.60, 0.10, 0.97, 0.97},
    {0.97, 0.97, 0.50, 0.97, 0.02, 0.97, 0.02, 0.02, 0.02, 0.97, 0.02, 0.02},
    {0.97, 0.05, 0.60, 0.60, 0.02, 0.05, 0.97, 0.97, 0.02, 0.50, 0.02, 0.05},
    {0.95, 0.50, 0.40, 0.60, 0.02, 0.50, 0.02, 0.02, 0.02, 0.80, 0.20, 0.50},
    {0.20, 0.20, 0.05, 0.02, 0.02, 0.10, 0.02, 0.02, 0.90, 0.05, 0.97, 0.20},
    {0.50, 0.05, 0.50, 0.10, 0.02, 0.05, 0.40, 0.45, 0.05, 0.05, 0.20, 0.50},
};

// State priors, global per class. Rule-relevant states sit near 0.5 so both
// branches of every choice get balanced supervision; tea-box fill leans
// filled because an empty box fails three tasks outright.
constexpr std::array<double, vocab::kNumObjects> kFilledProb = {
    0.50, 0.55, 0.0, 0.80, 0.0, 0.45, 0.0, 0.0, 0.50, 0.55, 0.0, 0.0};
constexpr std::array<double, vocab::kNumObjects> kOpenProb = {
    0.0, 0.0, 0.0, 0.50, 0.0, 0.0, 0.0, 0.0, 0.50, 0.50, 0.0, 0.50};
constexpr std::array<double, vocab::kNumObjects> kPowerOnProb = {
    0.0, 0.0, 0.50, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};

// Objects have class-typical footprints and shelf heights; only the x
// position varies, on a 0.1 grid with two zones: the reachable strip by the
// agent's side of the room and the far side. Location therefore carries
// exactly the signal the reach rules need without acting as a per-scene
// fingerprint.
constexpr std::array<double, vocab::kNumObjects> kSize = {
    0.05, 0.10, 0.15, 0.05, 0.05, 0.10, 0.05, 0.15, 0.15, 0.10, 0.05, 0.15};

BBox draw_bbox(Rng& rng, int class_id) {
  BBox bb;
  bb.w = kSize[static_cast<size_t>(class_id)];
  bb.h = bb.w;
  bb.y = 0.20 + 0.10 * static_cast<double>(class_id % 5);
  const double zone = rng.bernoulli(0.5) ? 0.05 : 0.65;
  bb.x = zone + 0.10 * static_cast<double>(rng.uniform_int(2));
  return bb;
}

}  // namespace

double presence_prob(Environment env, int class_id) {
  return kPresence[static_cast<size_t>(env)][static_cast<size_t>(class_id)];
}

ObjectInstance draw_instance(Rng& rng, int class_id) {
  const ClassStateSchema& schema = class_schema(class_id);
  ObjectInstance obj;
  obj.class_id = class_id;
  if (schema.has_fill) {
    obj.fill = rng.bernoulli(kFilledProb[static_cast<size_t>(class_id)])
                   ? FillState::Filled
                   : FillState::Empty;
  }
  if (schema.has_access) {
    obj.access = rng.bernoulli(kOpenProb[static_cast<size_t>(class_id)])
                     ? AccessState::Open
                     : AccessState::Closed;
  }
  if (schema.has_power) {
    obj.power = rng.bernoulli(kPowerOnProb[static_cast<size_t>(class_id)])
                    ? PowerState::On
                    : PowerState::Off;
  }
  obj.bbox = draw_bbox(rng, class_id);
  return obj;
}

Scene generate_scene(Rng& rng, Environment env, const SceneLayout& layout) {
  Scene scene;
  scene.environment = env;
  for (int cls = 0; cls < vocab::kNumObjects; ++cls) {
    if (static_cast<int>(scene.objects.size()) >= layout.m_max) break;
    if (rng.bernoulli(presence_prob(env, cls))) {
      scene.objects.push_back(draw_instance(rng, cls));
    }
  }
  if (scene.objects.empty()) {
    // Environments are configured so this is rare; fall back to the class
    // with the largest presence probability so no scene is ever empty.
    int best = 0;
    for (int cls = 1; cls < vocab::kNumObjects; ++cls) {
      if (presence_prob(env, cls) > presence_prob(env, best)) best = cls;
    }
    scene.objects.push_back(draw_instance(rng, best));
  }
  return scene;
}

}  // namespace aogplan::world
