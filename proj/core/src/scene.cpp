#include "aogplan/scene.hpp"

#include <algorithm>

#include "json.hpp"

namespace aogplan::world {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kNumEnvironments> kEnvNames = {
    "lab", "dormitory", "kitchen", "office", "living room", "balcony",
    "corridor"};

// Object class ids follow vocab::kObjectNames:
//   0 cup, 1 pot, 2 water dispenser, 3 tea box, 4 water, 5 bowl,
//   6 eraser, 7 board, 8 washing machine, 9 teapot, 10 clothes, 11 closet
constexpr std::array<ClassStateSchema, vocab::kNumObjects> kSchemas = {{
    {true, false, false},   // cup
    {true, false, false},   // pot
    {false, false, true},   // water dispenser
    {true, true, false},    // tea box
    {false, false, false},  // water
    {true, false, false},   // bowl
    {false, false, false},  // eraser
    {false, false, false},  // board
    {true, true, true},     // washing machine
    {true, true, false},    // teapot
    {false, false, false},  // clothes
    {false, true, false},   // closet
}};

int state_slot(FillState s) { return static_cast<int>(s); }
int state_slot(AccessState s) { return static_cast<int>(s); }
int state_slot(PowerState s) { return static_cast<int>(s); }

}  // namespace

std::string_view environment_name(Environment env) {
  return kEnvNames[static_cast<size_t>(env)];
}

int environment_id(std::string_view name) {
  for (int i = 0; i < kNumEnvironments; ++i) {
    if (kEnvNames[static_cast<size_t>(i)] == name) return i;
  }
  return -1;
}

const ClassStateSchema& class_schema(int class_id) {
  if (class_id < 0 || class_id >= vocab::kNumObjects) {
    throw WorldError("class id out of range: " + std::to_string(class_id));
  }
  return kSchemas[static_cast<size_t>(class_id)];
}

const ObjectInstance* Scene::find(int class_id) const {
  const ObjectInstance* best = nullptr;
  for (const auto& obj : objects) {
    if (obj.class_id != class_id) continue;
    if (!best || obj.bbox.x < best->bbox.x) best = &obj;
  }
  return best;
}

std::vector<std::string> validate_scene(const Scene& scene,
                                        const SceneLayout& layout) {
  std::vector<std::string> issues;
  if (static_cast<int>(scene.objects.size()) > layout.m_max) {
    issues.push_back("scene holds more than m_max objects");
  }
  int dispensers = 0, machines = 0;
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& obj = scene.objects[i];
    const std::string tag = "object " + std::to_string(i) + ": ";
    if (obj.class_id < 0 || obj.class_id >= vocab::kNumObjects) {
      issues.push_back(tag + "class id out of range");
      continue;
    }
    const ClassStateSchema& schema = class_schema(obj.class_id);
    if (schema.has_fill != (obj.fill != FillState::NotApplicable)) {
      issues.push_back(tag + "fill state not valid for class");
    }
    if (schema.has_access != (obj.access != AccessState::NotApplicable)) {
      issues.push_back(tag + "access state not valid for class");
    }
    if (schema.has_power != (obj.power != PowerState::NotApplicable)) {
      issues.push_back(tag + "power state not valid for class");
    }
    if (!obj.bbox.in_unit_square()) {
      issues.push_back(tag + "bbox outside unit square");
    }
    if (obj.class_id == vocab::object_id("water dispenser")) ++dispensers;
    if (obj.class_id == vocab::object_id("washing machine")) ++machines;
  }
  if (dispensers > 1) issues.push_back("more than one water dispenser");
  if (machines > 1) issues.push_back("more than one washing machine");
  return issues;
}

std::vector<const ObjectInstance*> canonical_order(const Scene& scene) {
  std::vector<const ObjectInstance*> order;
  order.reserve(scene.objects.size());
  for (const auto& obj : scene.objects) order.push_back(&obj);
  std::stable_sort(order.begin(), order.end(),
                   [](const ObjectInstance* a, const ObjectInstance* b) {
                     if (a->class_id != b->class_id)
                       return a->class_id < b->class_id;
                     return a->bbox.x < b->bbox.x;
                   });
  return order;
}

std::vector<double> encode_scene(const Scene& scene, const SceneLayout& layout) {
  if (static_cast<int>(scene.objects.size()) > layout.m_max) {
    throw WorldError("encode_scene: too many objects");
  }
  std::vector<double> out(static_cast<size_t>(layout.scene_feat_dim()), 0.0);
  const auto order = canonical_order(scene);
  for (size_t i = 0; i < order.size(); ++i) {
    const ObjectInstance& obj = *order[i];
    if (obj.class_id >= layout.m_max) {
      throw WorldError("encode_scene: class id exceeds slot count");
    }
    double* block =
        out.data() + static_cast<size_t>(obj.class_id) * SceneLayout::kObjectFeatDim;
    if (block[obj.class_id] != 0.0) {
      throw WorldError("encode_scene: duplicate instances of one class");
    }
    block[obj.class_id] = 1.0;
    block[vocab::kNumObjects + state_slot(obj.fill)] = 1.0;
    block[vocab::kNumObjects + 3 + state_slot(obj.access)] = 1.0;
    block[vocab::kNumObjects + 6 + state_slot(obj.power)] = 1.0;
    block[vocab::kNumObjects + 9 + 0] = obj.bbox.x;
    block[vocab::kNumObjects + 9 + 1] = obj.bbox.y;
    block[vocab::kNumObjects + 9 + 2] = obj.bbox.w;
    block[vocab::kNumObjects + 9 + 3] = obj.bbox.h;
  }
  return out;
}

std::vector<double> encode_task(int task_id) {
  if (task_id < 0 || task_id >= vocab::kNumTasks) {
    throw WorldError("encode_task: task id out of range");
  }
  std::vector<double> out(vocab::kNumTasks, 0.0);
  out[static_cast<size_t>(task_id)] = 1.0;
  return out;
}

std::string scene_to_json(const Scene& scene) {
  json doc;
  doc["environment"] = std::string(environment_name(scene.environment));
  json objs = json::array();
  for (const ObjectInstance* obj : canonical_order(scene)) {
    json jo;
    jo["class"] = std::string(vocab::object_name(obj->class_id));
    switch (obj->fill) {
      case FillState::Empty: jo["fill"] = "empty"; break;
      case FillState::Filled: jo["fill"] = "filled"; break;
      case FillState::NotApplicable: break;
    }
    switch (obj->access) {
      case AccessState::Open: jo["access"] = "open"; break;
      case AccessState::Closed: jo["access"] = "closed"; break;
      case AccessState::NotApplicable: break;
    }
    switch (obj->power) {
      case PowerState::On: jo["power"] = "on"; break;
      case PowerState::Off: jo["power"] = "off"; break;
      case PowerState::NotApplicable: break;
    }
    jo["bbox"] = {obj->bbox.x, obj->bbox.y, obj->bbox.w, obj->bbox.h};
    objs.push_back(std::move(jo));
  }
  doc["objects"] = std::move(objs);
  return doc.dump();
}

Scene scene_from_json(const std::string& text) {
  json doc = json::parse(text);
  Scene scene;
  int env = environment_id(doc.at("environment").get<std::string>());
  if (env < 0) throw WorldError("unknown environment in scene json");
  scene.environment = static_cast<Environment>(env);
  for (const auto& jo : doc.at("objects")) {
    ObjectInstance obj;
    obj.class_id = vocab::object_id(jo.at("class").get<std::string>());
    if (obj.class_id < 0 || obj.class_id >= vocab::kNumObjects) {
      throw WorldError("unknown object class in scene json");
    }
    if (jo.contains("fill")) {
      obj.fill = jo["fill"] == "filled" ? FillState::Filled : FillState::Empty;
    }
    if (jo.contains("access")) {
      obj.access =
          jo["access"] == "open" ? AccessState::Open : AccessState::Closed;
    }
    if (jo.contains("power")) {
      obj.power = jo["power"] == "on" ? PowerState::On : PowerState::Off;
    }
    const auto& bb = jo.at("bbox");
    obj.bbox = {bb.at(0).get<double>(), bb.at(1).get<double>(),
                bb.at(2).get<double>(), bb.at(3).get<double>()};
    scene.objects.push_back(obj);
  }
  return scene;
}

}  // namespace aogplan::world
