#pragma once

// Scene model and feature encoders.
//
// A scene is an environment tag plus a set of object instances, each with a
// class, three discrete attribute states (fill, access, power) and a unit-
// square bounding box. Objects are encoded as 25-real blocks (class one-hot,
// three 3-state one-hots, bbox) laid out in canonical order with one slot
// per object class, absent classes staying all-zero. The fixed slot per
// class keeps every scene fact at a stable feature position; with arbitrary
// per-scene packing the 215-sample annotated set was far too small for the
// selector to learn position-invariant rules (held-out selection accuracy
// plateaued near 75%).

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aogplan/vocab.hpp"

namespace aogplan::world {

enum class FillState : std::uint8_t { Empty, Filled, NotApplicable };
enum class AccessState : std::uint8_t { Open, Closed, NotApplicable };
enum class PowerState : std::uint8_t { On, Off, NotApplicable };

enum class Environment : std::uint8_t {
  Lab, Dormitory, Kitchen, Office, LivingRoom, Balcony, Corridor
};
inline constexpr int kNumEnvironments = 7;

std::string_view environment_name(Environment env);
int environment_id(std::string_view name);

struct BBox {
  double x = 0, y = 0, w = 0, h = 0;

  bool operator==(const BBox&) const = default;
  bool in_unit_square() const {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= 1 && y + h <= 1;
  }
  double center_x() const { return x + w / 2; }
};

struct ObjectInstance {
  int class_id = 0;
  FillState fill = FillState::NotApplicable;
  AccessState access = AccessState::NotApplicable;
  PowerState power = PowerState::NotApplicable;
  BBox bbox;

  bool operator==(const ObjectInstance&) const = default;
};

struct Scene {
  Environment environment = Environment::Kitchen;
  std::vector<ObjectInstance> objects;

  bool operator==(const Scene&) const = default;

  // First instance of a class in canonical order, or nullptr.
  const ObjectInstance* find(int class_id) const;
  bool has(int class_id) const { return find(class_id) != nullptr; }
};

// Which attribute states a class may take; board-like classes are all-n/a.
struct ClassStateSchema {
  bool has_fill = false;
  bool has_access = false;
  bool has_power = false;
};
const ClassStateSchema& class_schema(int class_id);

struct SceneLayout {
  int m_max = vocab::kNumObjects;  // one feature slot per class

  static constexpr int kObjectFeatDim =
      vocab::kNumObjects + 3 * 3 + 4;  // class one-hot + 3 states + bbox
  int scene_feat_dim() const { return m_max * kObjectFeatDim; }
  static constexpr int task_feat_dim() { return vocab::kNumTasks; }
};

// Scene-level structural check: class ids, per-class state schema, bbox
// bounds, object budget, and the at-most-one rule for dispenser and washing
// machine. Returns human-readable violations; empty means valid.
std::vector<std::string> validate_scene(const Scene& scene,
                                        const SceneLayout& layout);

// Objects sorted by (class id, bbox x); insertion order never leaks into
// features.
std::vector<const ObjectInstance*> canonical_order(const Scene& scene);

// f^I: per-object blocks in canonical (class id) order, each class at its
// own slot, absent slots zero. Throws WorldError when the scene holds more
// objects than slots or more than one instance of a class.
std::vector<double> encode_scene(const Scene& scene, const SceneLayout& layout);

// f^T: one-hot over the task vocabulary. Throws WorldError on a bad id.
std::vector<double> encode_task(int task_id);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

struct WorldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace aogplan::world
