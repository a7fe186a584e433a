#include "aogplan/run_config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace aogplan {

using nlohmann::json;

planner::AogPlannerDims RunConfig::aog_dims(int scene_dim, int aog_dim) const {
  planner::AogPlannerDims d;
  d.scene_dim = scene_dim;
  d.task_dim = vocab::kNumTasks;
  d.aog_dim = aog_dim;
  d.embed = aog_embed();
  d.hidden = aog_hidden();
  return d;
}

planner::ActionPlannerDims RunConfig::action_dims(int scene_dim) const {
  planner::ActionPlannerDims d;
  d.scene_dim = scene_dim;
  d.task_dim = vocab::kNumTasks;
  d.embed = action_embed();
  d.hidden = action_hidden();
  return d;
}

RunConfig RunConfig::desk_profile(std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.dataset.seed = seed;
  cfg.profile = "desk";
  // Desk runs train for tens of epochs, so the curriculum advances every 12
  // epochs instead of the published 100.
  cfg.schedule.epochs_per_step = 12;
  return cfg;
}

RunConfig RunConfig::paper_profile(std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.dataset.seed = seed;
  cfg.profile = "paper";
  cfg.schedule.epochs_per_step = 100;
  cfg.aog_epochs = 600;
  cfg.action_epochs = 600;
  cfg.action_epochs_aug = 400;
  return cfg;
}

std::string RunConfig::to_json(int indent) const {
  json doc;
  doc["seed"] = seed;
  doc["profile"] = profile;
  doc["catalog_dir"] = catalog_dir.string();
  doc["out_dir"] = out_dir.string();
  doc["dataset"] = {{"n_train", dataset.n_train},
                    {"n_test", dataset.n_test},
                    {"n_pool", dataset.n_pool},
                    {"n_train_tasks", dataset.n_train_tasks},
                    {"m_max", dataset.layout.m_max}};
  doc["sgd"] = {{"lr", sgd.lr},
                {"momentum", sgd.momentum},
                {"weight_decay", sgd.weight_decay},
                {"batch_size", sgd.batch_size}};
  doc["schedule"] = {{"tau_init", schedule.tau_init},
                     {"tau_step", schedule.tau_step},
                     {"epochs_per_step", schedule.epochs_per_step},
                     {"tau_max", schedule.tau_max}};
  doc["curriculum"] = curriculum;
  doc["augment"] = augment;
  doc["noise_ratio"] = noise_ratio;
  doc["aog_epochs"] = aog_epochs;
  doc["action_epochs"] = action_epochs;
  doc["action_epochs_aug"] = action_epochs_aug;
  doc["l_max"] = l_max;
  return indent >= 0 ? doc.dump(indent) : doc.dump();
}

RunConfig RunConfig::from_json(const std::string& text) {
  json doc = json::parse(text);
  RunConfig cfg;
  if (doc.contains("profile")) {
    cfg = doc["profile"] == "paper" ? paper_profile() : desk_profile();
  }
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.profile = doc.value("profile", cfg.profile);
  cfg.catalog_dir = doc.value("catalog_dir", cfg.catalog_dir.string());
  cfg.out_dir = doc.value("out_dir", cfg.out_dir.string());
  if (doc.contains("dataset")) {
    const auto& d = doc["dataset"];
    cfg.dataset.n_train = d.value("n_train", cfg.dataset.n_train);
    cfg.dataset.n_test = d.value("n_test", cfg.dataset.n_test);
    cfg.dataset.n_pool = d.value("n_pool", cfg.dataset.n_pool);
    cfg.dataset.n_train_tasks = d.value("n_train_tasks", cfg.dataset.n_train_tasks);
    cfg.dataset.layout.m_max = d.value("m_max", cfg.dataset.layout.m_max);
  }
  if (doc.contains("sgd")) {
    const auto& s = doc["sgd"];
    cfg.sgd.lr = s.value("lr", cfg.sgd.lr);
    cfg.sgd.momentum = s.value("momentum", cfg.sgd.momentum);
    cfg.sgd.weight_decay = s.value("weight_decay", cfg.sgd.weight_decay);
    cfg.sgd.batch_size = s.value("batch_size", cfg.sgd.batch_size);
  }
  if (doc.contains("schedule")) {
    const auto& s = doc["schedule"];
    cfg.schedule.tau_init = s.value("tau_init", cfg.schedule.tau_init);
    cfg.schedule.tau_step = s.value("tau_step", cfg.schedule.tau_step);
    cfg.schedule.epochs_per_step =
        s.value("epochs_per_step", cfg.schedule.epochs_per_step);
    cfg.schedule.tau_max = s.value("tau_max", cfg.schedule.tau_max);
  }
  cfg.curriculum = doc.value("curriculum", cfg.curriculum);
  cfg.augment = doc.value("augment", cfg.augment);
  cfg.noise_ratio = doc.value("noise_ratio", cfg.noise_ratio);
  cfg.aog_epochs = doc.value("aog_epochs", cfg.aog_epochs);
  cfg.action_epochs = doc.value("action_epochs", cfg.action_epochs);
  cfg.action_epochs_aug = doc.value("action_epochs_aug", cfg.action_epochs_aug);
  cfg.l_max = doc.value("l_max", cfg.l_max);
  cfg.dataset.seed = cfg.seed;
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + file.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void RunConfig::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) {
    throw std::runtime_error("cannot write config file: " + file.string());
  }
  out << to_json(2) << "\n";
}

std::uint64_t RunConfig::config_hash() const {
  const std::string s = to_json();
  return world::fnv1a_bytes(s.data(), s.size());
}

std::string RunConfig::config_hash_hex() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(config_hash()));
  return buf;
}

}  // namespace aogplan
