#pragma once

// Dataset builder and sample serialization.
//
// Ground truth comes from the rule oracle; scenes come from the environment
// generator with light per-task injection so most (scene, task) pairings are
// satisfiable while every task keeps a healthy share of task-fail cases.
// Train, test and pool scene streams are derived from disjoint seeds.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aogplan/catalog.hpp"
#include "aogplan/oracle.hpp"
#include "aogplan/rng.hpp"
#include "aogplan/scene.hpp"
#include "aogplan/scene_gen.hpp"

namespace aogplan::world {

enum class SampleOrigin : std::uint8_t { Annotated, Generated };

struct Sample {
  Scene scene;
  int task_id = 0;
  grammar::OrSelectionList selections;
  std::vector<AtomicAction> sequence;
  double uncertainty = 0.0;
  SampleOrigin origin = SampleOrigin::Annotated;

  // Non-empty only for in-memory noise experiments: replaces encode_scene
  // output so corrupted score vectors can stand in for the clean one-hots.
  // Never serialized.
  std::vector<double> feature_override;

  bool is_task_fail() const {
    return sequence.size() == 1 && sequence[0].is_task_fail();
  }
};

// An unlabeled (scene, task) pairing awaiting augmentation.
struct PoolEntry {
  Scene scene;
  int task_id = 0;
};

struct DatasetConfig {
  std::uint64_t seed = 7;
  int n_train = 215;   // tasks 0..11 only
  int n_test = 983;    // all 15 tasks
  int n_pool = 2600;   // all 15 tasks, unlabeled
  int n_train_tasks = 12;
  SceneLayout layout;

  std::string canonical_json() const;
  std::uint64_t config_hash() const;
};

struct Dataset {
  DatasetConfig config;
  std::uint64_t catalog_hash = 0;
  int n_max = 0;
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::vector<PoolEntry> pool;
};

Dataset build_dataset(const std::vector<grammar::TaskAog>& catalog,
                      const DatasetConfig& config);

// Environments a task is drawn in; used by the builder and by tests.
const std::vector<Environment>& task_environments(int task_id);

// Stable identity of a (scene, task) pairing, used to drop generated
// duplicates of annotated samples.
std::uint64_t sample_key(const Scene& scene, int task_id);

// JSON-lines IO. The first line is a metadata header (vocab, layout dims,
// seed, config hash); each following line is one sample.
void write_samples_jsonl(std::ostream& out, const Dataset& dataset,
                         const std::vector<Sample>& samples);
void write_samples_jsonl(const std::filesystem::path& path,
                         const Dataset& dataset,
                         const std::vector<Sample>& samples);
std::vector<Sample> read_samples_jsonl(std::istream& in);
std::vector<Sample> read_samples_jsonl(const std::filesystem::path& path);

std::string sample_to_json(const Sample& sample);
Sample sample_from_json(const std::string& line);

// Unlabeled pool entries use the same header + one-JSON-per-line layout.
void write_pool_jsonl(const std::filesystem::path& path, const Dataset& dataset,
                      const std::vector<PoolEntry>& pool);
std::vector<PoolEntry> read_pool_jsonl(const std::filesystem::path& path);

std::uint64_t fnv1a_bytes(const void* data, size_t len,
                          std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace aogplan::world
