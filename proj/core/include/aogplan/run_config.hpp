#pragma once

// One config object drives every pipeline stage. The desk profile keeps the
// run CPU-friendly; the paper profile uses the published layer widths and
// curriculum pacing. Every artifact written embeds this config's hash.

#include <cstdint>
#include <filesystem>
#include <string>

#include "aogplan/action_planner.hpp"
#include "aogplan/aog_planner.hpp"
#include "aogplan/dataset.hpp"
#include "aogplan/nn/optim.hpp"

namespace aogplan {

struct RunConfig {
  std::uint64_t seed = 7;
  std::string profile = "desk";  // desk | paper

  std::filesystem::path catalog_dir = "data/catalog";
  std::filesystem::path out_dir = "out";

  world::DatasetConfig dataset;
  nn::SgdConfig sgd;
  planner::CurriculumSchedule schedule;
  bool curriculum = true;
  bool augment = true;
  double noise_ratio = 0.0;  // target negative ratio; 0 disables noise

  // Training lengths. Augmented runs see ~13x the data per epoch, hence the
  // separate budget.
  int aog_epochs = 400;
  int action_epochs = 300;      // annotated-only runs
  int action_epochs_aug = 60;   // runs that include the augmented set
  int l_max = planner::kDefaultMaxDecodeLen;

  // Layer widths per profile.
  int aog_embed() const { return profile == "paper" ? 256 : 64; }
  int aog_hidden() const { return profile == "paper" ? 256 : 64; }
  int action_embed() const { return profile == "paper" ? 256 : 64; }
  int action_hidden() const { return profile == "paper" ? 512 : 64; }

  planner::AogPlannerDims aog_dims(int scene_dim, int aog_dim) const;
  planner::ActionPlannerDims action_dims(int scene_dim) const;

  static RunConfig desk_profile(std::uint64_t seed = 7);
  static RunConfig paper_profile(std::uint64_t seed = 7);

  std::string to_json(int indent = -1) const;
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::filesystem::path& file);
  void save(const std::filesystem::path& file) const;

  std::uint64_t config_hash() const;
  std::string config_hash_hex() const;
};

}  // namespace aogplan
