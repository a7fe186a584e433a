#include "aogplan/catalog.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace aogplan::grammar {

using nlohmann::json;

namespace {

NodeKind parse_kind(const std::string& s, const std::filesystem::path& file) {
  if (s == "and") return NodeKind::And;
  if (s == "or") return NodeKind::Or;
  if (s == "leaf") return NodeKind::Leaf;
  throw CatalogError(file.string() + ": unknown node kind '" + s + "'");
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

TaskAog load_task_aog(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw CatalogError("cannot open catalog file: " + file.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw CatalogError(file.string() + ": " + e.what());
  }

  if (doc.value("schema_version", -1) != kCatalogSchemaVersion) {
    throw CatalogError(file.string() + ": unsupported schema_version");
  }

  TaskAog aog;
  aog.task_id = doc.at("task_id").get<int>();
  if (aog.task_id < 0 || aog.task_id >= vocab::kNumTasks) {
    throw CatalogError(file.string() + ": task_id out of range");
  }

  const auto& nodes = doc.at("nodes");
  aog.nodes.reserve(nodes.size());
  for (const auto& jn : nodes) {
    AogNode node;
    node.id = jn.at("id").get<int>();
    node.kind = parse_kind(jn.at("kind").get<std::string>(), file);
    node.children = jn.at("children").get<std::vector<int>>();
    node.label = jn.value("label", "");
    if (node.kind == NodeKind::Leaf) {
      const auto action = jn.at("action").get<std::string>();
      const auto object = jn.at("object").get<std::string>();
      int aid = vocab::action_id(action);
      int oid = vocab::object_id(object);
      if (aid < 0 || aid >= vocab::kNumPrimitiveActions) {
        throw CatalogError(file.string() + ": unknown action '" + action + "'");
      }
      if (oid < 0 || oid >= vocab::kNumObjects) {
        throw CatalogError(file.string() + ": unknown object '" + object + "'");
      }
      node.action = AtomicAction{aid, oid};
    }
    aog.nodes.push_back(std::move(node));
  }
  std::sort(aog.nodes.begin(), aog.nodes.end(),
            [](const AogNode& a, const AogNode& b) { return a.id < b.id; });
  aog.alive.assign(aog.nodes.size(), 1);
  aog.root = 0;

  ValidationReport report = validate(aog);
  if (!report.ok()) {
    throw CatalogError(file.string() + ": invalid graph:\n" + report.to_string());
  }
  return aog;
}

std::vector<TaskAog> load_catalog(const std::filesystem::path& dir) {
  std::vector<TaskAog> catalog;
  if (!std::filesystem::is_directory(dir)) {
    throw CatalogError("catalog directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) catalog.push_back(load_task_aog(file));

  std::sort(catalog.begin(), catalog.end(),
            [](const TaskAog& a, const TaskAog& b) { return a.task_id < b.task_id; });
  for (size_t i = 0; i < catalog.size(); ++i) {
    if (catalog[i].task_id != static_cast<int>(i)) {
      throw CatalogError("catalog task ids are not a contiguous 0-based range");
    }
  }
  return catalog;
}

std::string task_aog_to_json(const TaskAog& aog) {
  json doc;
  doc["schema_version"] = kCatalogSchemaVersion;
  doc["task_id"] = aog.task_id;
  doc["name"] = std::string(vocab::task_name(aog.task_id));
  json nodes = json::array();
  for (const AogNode& n : aog.nodes) {
    if (!aog.is_alive(n.id)) continue;
    json jn;
    jn["id"] = n.id;
    switch (n.kind) {
      case NodeKind::And: jn["kind"] = "and"; break;
      case NodeKind::Or: jn["kind"] = "or"; break;
      case NodeKind::Leaf: jn["kind"] = "leaf"; break;
    }
    json children = json::array();
    for (NodeId child : n.children) {
      if (aog.is_alive(child)) children.push_back(child);
    }
    jn["children"] = std::move(children);
    if (n.action) {
      jn["action"] = std::string(vocab::action_name(n.action->action));
      jn["object"] = std::string(vocab::object_name(n.action->object));
    }
    jn["label"] = n.label;
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(2) + "\n";
}

std::uint64_t catalog_content_hash(const std::vector<TaskAog>& catalog) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const TaskAog& aog : catalog) {
    std::string s = task_aog_to_json(aog);
    h = fnv1a(h, s.data(), s.size());
  }
  return h;
}

}  // namespace aogplan::grammar
