#include "aogplan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "aogplan/aog_encoding.hpp"
#include "json.hpp"

namespace aogplan::world {

using nlohmann::json;

std::uint64_t fnv1a_bytes(const void* data, size_t len, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string DatasetConfig::canonical_json() const {
  json doc;
  doc["seed"] = seed;
  doc["n_train"] = n_train;
  doc["n_test"] = n_test;
  doc["n_pool"] = n_pool;
  doc["n_train_tasks"] = n_train_tasks;
  doc["m_max"] = layout.m_max;
  return doc.dump();
}

std::uint64_t DatasetConfig::config_hash() const {
  const std::string s = canonical_json();
  return fnv1a_bytes(s.data(), s.size());
}

std::uint64_t sample_key(const Scene& scene, int task_id) {
  const std::string s = scene_to_json(scene);
  return fnv1a_bytes(s.data(), s.size(),
                     0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(task_id));
}

namespace {

constexpr Environment kLab = Environment::Lab;
constexpr Environment kDorm = Environment::Dormitory;
constexpr Environment kKitchen = Environment::Kitchen;
constexpr Environment kOffice = Environment::Office;
constexpr Environment kLiving = Environment::LivingRoom;
constexpr Environment kBalcony = Environment::Balcony;
constexpr Environment kCorridor = Environment::Corridor;

const std::vector<Environment> kTaskEnvs[vocab::kNumTasks] = {
    {kKitchen, kLiving, kOffice},             // 0 pour cup water into bowl
    {kKitchen, kOffice, kLiving, kLab},       // 1 make tea
    {kKitchen, kOffice, kLab},                // 2 make tea w/ dispenser
    {kLab, kOffice, kCorridor},               // 3 clean board
    {kKitchen, kOffice, kLab, kCorridor},     // 4 hot water
    {kKitchen, kLiving},                      // 5 hot water from pot
    {kKitchen, kOffice, kLiving, kLab, kCorridor},  // 6 pour water
    {kKitchen, kLiving},                      // 7 pour water from pot
    {kLiving, kOffice, kKitchen},             // 8 tea from teapot
    {kBalcony, kDorm},                        // 9 wash w/ machine
    {kBalcony, kDorm},                        // 10 wash in machine
    {kDorm, kLiving, kBalcony},               // 11 clothes into closet
    {kKitchen, kLiving},                      // 12 make tea w/ pot water
    {kKitchen, kOffice, kLab, kCorridor},     // 13 hot water from dispenser
    {kKitchen, kOffice, kLab, kCorridor},     // 14 water from dispenser
};

struct Ensure {
  int class_id;
  double p_present;
  double p_filled = -1.0;  // <0: leave the drawn fill state alone
};

// What "source" availability to patch up when every source is unusable.
enum class SourceFix { None, DispenserOrPot, AnyOfThree };

struct TaskBias {
  std::vector<Ensure> ensures;
  SourceFix source_fix = SourceFix::None;
  double p_source_fix = 0.0;
};

const TaskBias& task_bias(int task) {
  namespace oc = vocab;
  static const int cup = oc::object_id("cup");
  static const int pot = oc::object_id("pot");
  static const int disp = oc::object_id("water dispenser");
  static const int teabox = oc::object_id("tea box");
  static const int bowl = oc::object_id("bowl");
  static const int eraser = oc::object_id("eraser");
  static const int board = oc::object_id("board");
  static const int machine = oc::object_id("washing machine");
  static const int teapot = oc::object_id("teapot");
  static const int clothes = oc::object_id("clothes");
  static const int closet = oc::object_id("closet");
  static const std::vector<TaskBias> biases = {
      {{{cup, 0.92, 0.80}, {bowl, 0.92}}, SourceFix::None, 0},
      {{{cup, 0.92}, {teabox, 0.92, 0.85}}, SourceFix::DispenserOrPot, 0.75},
      {{{cup, 0.92}, {teabox, 0.92, 0.85}, {disp, 0.90}}, SourceFix::None, 0},
      {{{eraser, 0.92}, {board, 0.92}}, SourceFix::None, 0},
      {{{cup, 0.92}}, SourceFix::DispenserOrPot, 0.75},
      {{{cup, 0.92}, {pot, 0.90, 0.75}}, SourceFix::None, 0},
      {{{cup, 0.92}}, SourceFix::AnyOfThree, 0.70},
      {{{cup, 0.92}, {pot, 0.90, 0.75}}, SourceFix::None, 0},
      {{{cup, 0.92}, {teapot, 0.90, 0.75}}, SourceFix::None, 0},
      {{{clothes, 0.92}, {machine, 0.92}}, SourceFix::None, 0},
      {{{machine, 0.92, 0.75}}, SourceFix::None, 0},
      {{{clothes, 0.92}, {closet, 0.92}}, SourceFix::None, 0},
      {{{cup, 0.92}, {teabox, 0.92, 0.85}, {pot, 0.90, 0.75}},
       SourceFix::None, 0},
      {{{cup, 0.92}, {disp, 0.90}}, SourceFix::None, 0},
      {{{cup, 0.92}, {disp, 0.90}}, SourceFix::None, 0},
  };
  return biases[static_cast<size_t>(task)];
}

ObjectInstance* find_mut(Scene& scene, int class_id) {
  ObjectInstance* best = nullptr;
  for (auto& obj : scene.objects) {
    if (obj.class_id != class_id) continue;
    if (!best || obj.bbox.x < best->bbox.x) best = &obj;
  }
  return best;
}

void insert_object(Scene& scene, Rng& rng, int class_id,
                   const SceneLayout& layout,
                   const std::vector<Ensure>& required) {
  if (static_cast<int>(scene.objects.size()) >= layout.m_max) {
    // Make room: evict the highest-class object that the task does not need.
    for (int i = static_cast<int>(scene.objects.size()) - 1; i >= 0; --i) {
      const int cid = scene.objects[static_cast<size_t>(i)].class_id;
      bool needed = std::any_of(required.begin(), required.end(),
                                [&](const Ensure& e) { return e.class_id == cid; });
      if (!needed) {
        scene.objects.erase(scene.objects.begin() + i);
        break;
      }
    }
  }
  scene.objects.push_back(draw_instance(rng, class_id));
}

// Draws a scene for one (split, index, task) and nudges it toward
// satisfiability with the task's bias table.
Scene scene_for_sample(Rng& rng, int task, const SceneLayout& layout) {
  const auto& envs = kTaskEnvs[static_cast<size_t>(task)];
  Environment env = envs[rng.uniform_int(envs.size())];
  Scene scene = generate_scene(rng, env, layout);

  const TaskBias& bias = task_bias(task);
  for (const Ensure& e : bias.ensures) {
    if (!scene.has(e.class_id) && rng.bernoulli(e.p_present)) {
      insert_object(scene, rng, e.class_id, layout, bias.ensures);
    }
    if (e.p_filled >= 0.0) {
      if (ObjectInstance* obj = find_mut(scene, e.class_id)) {
        if (obj->fill == FillState::Empty && rng.bernoulli(e.p_filled)) {
          obj->fill = FillState::Filled;
        }
      }
    }
  }

  if (bias.source_fix != SourceFix::None) {
    const int disp = vocab::object_id("water dispenser");
    const int pot = vocab::object_id("pot");
    const int teapot = vocab::object_id("teapot");
    auto filled = [&](int c) {
      const ObjectInstance* o = scene.find(c);
      return o && o->fill == FillState::Filled;
    };
    // A present dispenser counts as a source (plans power it on as needed).
    bool usable = scene.has(disp) || filled(pot) ||
                  (bias.source_fix == SourceFix::AnyOfThree && filled(teapot));
    if (!usable && rng.bernoulli(bias.p_source_fix)) {
      insert_object(scene, rng, disp, layout, bias.ensures);
    }
  }
  return scene;
}

std::vector<int> task_allocation(int total, int n_tasks) {
  std::vector<int> counts(static_cast<size_t>(n_tasks), total / n_tasks);
  for (int i = 0; i < total % n_tasks; ++i) counts[static_cast<size_t>(i)]++;
  return counts;
}

// Annotated-split allocation. Tasks whose or-rules appear nowhere else get
// proportionally more of the budget so every rule sees enough supervision;
// the widely shared rules (reach/prep cup) are covered by every task anyway.
std::vector<int> weighted_train_allocation(int total, int n_tasks) {
  static const int kWeights[] = {3, 4, 4, 1, 4, 2, 4, 2, 2, 1, 1, 1};
  std::vector<double> weights(static_cast<size_t>(n_tasks), 1.0);
  for (int t = 0; t < n_tasks && t < 12; ++t) {
    weights[static_cast<size_t>(t)] = kWeights[t];
  }
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> counts(static_cast<size_t>(n_tasks), 0);
  std::vector<std::pair<double, int>> remainders;
  int assigned = 0;
  for (int t = 0; t < n_tasks; ++t) {
    const double exact = total * weights[static_cast<size_t>(t)] / sum;
    counts[static_cast<size_t>(t)] = static_cast<int>(exact);
    assigned += counts[static_cast<size_t>(t)];
    remainders.push_back({exact - std::floor(exact), t});
  }
  std::sort(remainders.begin(), remainders.end(), [](auto& a, auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int k = 0; k < total - assigned; ++k) {
    counts[static_cast<size_t>(remainders[static_cast<size_t>(k)].second)]++;
  }
  return counts;
}

}  // namespace

const std::vector<Environment>& task_environments(int task_id) {
  if (task_id < 0 || task_id >= vocab::kNumTasks) {
    throw WorldError("task id out of range");
  }
  return kTaskEnvs[static_cast<size_t>(task_id)];
}

Dataset build_dataset(const std::vector<grammar::TaskAog>& catalog,
                      const DatasetConfig& config) {
  if (static_cast<int>(catalog.size()) != vocab::kNumTasks) {
    throw WorldError("build_dataset: catalog must hold all tasks");
  }
  Dataset ds;
  ds.config = config;
  ds.catalog_hash = grammar::catalog_content_hash(catalog);
  ds.n_max = grammar::layout_for(catalog).n_max;

  auto make_annotated = [&](const char* tag, int total, int n_tasks,
                            bool weighted, std::vector<Sample>& out) {
    const auto counts = weighted ? weighted_train_allocation(total, n_tasks)
                                 : task_allocation(total, n_tasks);
    std::uint64_t index = 0;
    for (int task = 0; task < n_tasks; ++task) {
      for (int i = 0; i < counts[static_cast<size_t>(task)]; ++i, ++index) {
        Rng rng = Rng::derive(config.seed, tag, index);
        Sample s;
        s.scene = scene_for_sample(rng, task, config.layout);
        s.task_id = task;
        OraclePlan plan = oracle_plan(s.scene, catalog[static_cast<size_t>(task)]);
        s.selections = plan.failed ? grammar::OrSelectionList{} : plan.selections;
        s.sequence = plan.sequence;
        s.uncertainty = 0.0;
        s.origin = SampleOrigin::Annotated;
        out.push_back(std::move(s));
      }
    }
  };

  make_annotated("train", config.n_train, config.n_train_tasks, true, ds.train);
  make_annotated("test", config.n_test, vocab::kNumTasks, false, ds.test);

  const auto pool_counts = task_allocation(config.n_pool, vocab::kNumTasks);
  std::uint64_t index = 0;
  for (int task = 0; task < vocab::kNumTasks; ++task) {
    for (int i = 0; i < pool_counts[static_cast<size_t>(task)]; ++i, ++index) {
      Rng rng = Rng::derive(config.seed, "pool", index);
      PoolEntry entry;
      entry.scene = scene_for_sample(rng, task, config.layout);
      entry.task_id = task;
      ds.pool.push_back(std::move(entry));
    }
  }
  return ds;
}

std::string sample_to_json(const Sample& sample) {
  json doc;
  doc["scene"] = json::parse(scene_to_json(sample.scene));
  doc["task_id"] = sample.task_id;
  json sels = json::array();
  for (const auto& sel : sample.selections) {
    sels.push_back({sel.or_id, sel.branch});
  }
  doc["selections"] = std::move(sels);
  json seq = json::array();
  for (const auto& a : sample.sequence) {
    seq.push_back({a.action, a.object});
  }
  doc["sequence"] = std::move(seq);
  doc["uncertainty"] = sample.uncertainty;
  doc["origin"] =
      sample.origin == SampleOrigin::Annotated ? "annotated" : "generated";
  return doc.dump();
}

Sample sample_from_json(const std::string& line) {
  json doc = json::parse(line);
  Sample s;
  s.scene = scene_from_json(doc.at("scene").dump());
  s.task_id = doc.at("task_id").get<int>();
  for (const auto& sel : doc.at("selections")) {
    s.selections.push_back({sel.at(0).get<int>(), sel.at(1).get<int>()});
  }
  for (const auto& a : doc.at("sequence")) {
    s.sequence.push_back({a.at(0).get<int>(), a.at(1).get<int>()});
  }
  s.uncertainty = doc.at("uncertainty").get<double>();
  s.origin = doc.at("origin") == "annotated" ? SampleOrigin::Annotated
                                             : SampleOrigin::Generated;
  return s;
}

void write_samples_jsonl(std::ostream& out, const Dataset& dataset,
                         const std::vector<Sample>& samples) {
  json header;
  header["format_version"] = 1;
  header["seed"] = dataset.config.seed;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(dataset.config.config_hash()));
  header["config_hash"] = hash;
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(dataset.catalog_hash));
  header["catalog_hash"] = hash;
  header["n_max"] = dataset.n_max;
  header["m_max"] = dataset.config.layout.m_max;
  json vocab_doc;
  vocab_doc["actions"] = vocab::kActionNames;
  vocab_doc["objects"] = vocab::kObjectNames;
  vocab_doc["tasks"] = vocab::kTaskNames;
  header["vocab"] = std::move(vocab_doc);
  out << header.dump() << "\n";
  for (const Sample& s : samples) out << sample_to_json(s) << "\n";
}

void write_samples_jsonl(const std::filesystem::path& path,
                         const Dataset& dataset,
                         const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WorldError("cannot write " + path.string());
  write_samples_jsonl(out, dataset, samples);
}

std::vector<Sample> read_samples_jsonl(std::istream& in) {
  std::vector<Sample> samples;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!header_seen) {
      json header = json::parse(line);
      if (header.value("format_version", -1) != 1) {
        throw WorldError("unsupported sample file format_version");
      }
      header_seen = true;
      continue;
    }
    samples.push_back(sample_from_json(line));
  }
  if (!header_seen) throw WorldError("sample file has no metadata header");
  return samples;
}

std::vector<Sample> read_samples_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WorldError("cannot read " + path.string());
  return read_samples_jsonl(in);
}

void write_pool_jsonl(const std::filesystem::path& path, const Dataset& dataset,
                      const std::vector<PoolEntry>& pool) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WorldError("cannot write " + path.string());
  json header;
  header["format_version"] = 1;
  header["kind"] = "pool";
  header["seed"] = dataset.config.seed;
  out << header.dump() << "\n";
  for (const PoolEntry& entry : pool) {
    json doc;
    doc["scene"] = json::parse(scene_to_json(entry.scene));
    doc["task_id"] = entry.task_id;
    out << doc.dump() << "\n";
  }
}

std::vector<PoolEntry> read_pool_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WorldError("cannot read " + path.string());
  std::vector<PoolEntry> pool;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    json doc = json::parse(line);
    PoolEntry entry;
    entry.scene = scene_from_json(doc.at("scene").dump());
    entry.task_id = doc.at("task_id").get<int>();
    pool.push_back(std::move(entry));
  }
  return pool;
}

}  // namespace aogplan::world
