// Command-line front end for the grammar-grounded task-planning pipeline:
// dataset generation, the two training stages, augmentation, evaluation and
// the table-style experiments.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "aogplan/experiments.hpp"
#include "aogplan/noise.hpp"
#include "aogplan/run_config.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace aogplan;

namespace {

struct GlobalFlags {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> profile;
  std::optional<std::string> out_dir;
  std::optional<std::string> catalog_dir;
  std::optional<double> tau_init, tau_step;
  bool no_curriculum = false;
  bool no_augment = false;
  std::optional<double> noise_ratio;
};

// Config file first, then flags; flags win.
RunConfig resolve_config(const GlobalFlags& flags) {
  RunConfig cfg;
  if (!flags.config_file.empty()) {
    cfg = RunConfig::load(flags.config_file);
  } else if (flags.profile && *flags.profile == "paper") {
    cfg = RunConfig::paper_profile();
  } else {
    cfg = RunConfig::desk_profile();
  }
  if (flags.profile) {
    RunConfig base = *flags.profile == "paper"
                         ? RunConfig::paper_profile(cfg.seed)
                         : RunConfig::desk_profile(cfg.seed);
    base.catalog_dir = cfg.catalog_dir;
    base.out_dir = cfg.out_dir;
    cfg = base;
  }
  if (flags.seed) {
    cfg.seed = *flags.seed;
    cfg.dataset.seed = *flags.seed;
  }
  if (flags.out_dir) {
    cfg.out_dir = *flags.out_dir;
  } else if (const char* root = std::getenv("AOGPLAN_OUT_ROOT")) {
    cfg.out_dir = fs::path(root);
  }
  if (flags.catalog_dir) cfg.catalog_dir = *flags.catalog_dir;
  if (flags.tau_init) cfg.schedule.tau_init = *flags.tau_init;
  if (flags.tau_step) cfg.schedule.tau_step = *flags.tau_step;
  if (flags.no_curriculum) cfg.curriculum = false;
  if (flags.no_augment) cfg.augment = false;
  if (flags.noise_ratio) cfg.noise_ratio = *flags.noise_ratio;
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

nlohmann::json artifact_stamp(const RunConfig& cfg,
                              const world::Dataset& dataset) {
  nlohmann::json doc;
  doc["config_hash"] = cfg.config_hash_hex();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(dataset.catalog_hash));
  doc["catalog_hash"] = buf;
  doc["seed"] = cfg.seed;
  return doc;
}

fs::path dataset_dir(const RunConfig& cfg) { return cfg.out_dir / "dataset"; }

world::Dataset load_dataset(const RunConfig& cfg,
                            const std::vector<grammar::TaskAog>& catalog) {
  const fs::path dir = dataset_dir(cfg);
  world::Dataset ds;
  ds.config = cfg.dataset;
  ds.catalog_hash = grammar::catalog_content_hash(catalog);
  ds.n_max = grammar::layout_for(catalog).n_max;
  ds.train = world::read_samples_jsonl(dir / "train.jsonl");
  ds.test = world::read_samples_jsonl(dir / "test.jsonl");
  ds.pool = world::read_pool_jsonl(dir / "pool.jsonl");
  return ds;
}

int cmd_dataset_gen(const RunConfig& cfg) {
  const auto catalog = grammar::load_catalog(cfg.catalog_dir);
  const auto dataset = world::build_dataset(catalog, cfg.dataset);
  const fs::path dir = dataset_dir(cfg);
  fs::create_directories(dir);
  world::write_samples_jsonl(dir / "train.jsonl", dataset, dataset.train);
  world::write_samples_jsonl(dir / "test.jsonl", dataset, dataset.test);
  world::write_pool_jsonl(dir / "pool.jsonl", dataset, dataset.pool);
  nlohmann::json meta = artifact_stamp(cfg, dataset);
  meta["n_train"] = dataset.train.size();
  meta["n_test"] = dataset.test.size();
  meta["n_pool"] = dataset.pool.size();
  meta["n_max"] = dataset.n_max;
  write_text(dir / "meta.json", meta.dump(2) + "\n");
  std::cout << "dataset: " << dataset.train.size() << " train / "
            << dataset.test.size() << " test / " << dataset.pool.size()
            << " pool -> " << dir.string() << "\n";
  return 0;
}

int cmd_train_aog(const RunConfig& cfg) {
  const auto catalog = grammar::load_catalog(cfg.catalog_dir);
  const auto enc_layout = grammar::layout_for(catalog);
  const auto dataset = load_dataset(cfg, catalog);

  planner::AogTrainOptions options;
  options.sgd = cfg.sgd;
  options.epochs = cfg.aog_epochs;
  options.seed = cfg.seed;
  planner::TrainLog log;
  auto params = planner::train_aog_planner(
      dataset.train, catalog, enc_layout, cfg.dataset.layout,
      cfg.aog_dims(cfg.dataset.layout.scene_feat_dim(), enc_layout.total_dim()),
      options, &log);

  const fs::path ckpt = cfg.out_dir / "checkpoints" / "aog.ckpt";
  fs::create_directories(ckpt.parent_path());
  auto meta = nlohmann::json::parse(params.meta_json());
  meta.update(artifact_stamp(cfg, dataset));
  nn::save_checkpoint(ckpt, params.registry(), meta.dump());
  write_text(cfg.out_dir / "logs" / "aog_train.csv", log.to_csv());
  std::cout << "aog planner -> " << ckpt.string() << " (best epoch "
            << log.best_epoch << ")\n";
  return 0;
}

int cmd_augment(const RunConfig& cfg) {
  const auto catalog = grammar::load_catalog(cfg.catalog_dir);
  const auto enc_layout = grammar::layout_for(catalog);
  const auto dataset = load_dataset(cfg, catalog);
  auto params =
      planner::load_aog_planner(cfg.out_dir / "checkpoints" / "aog.ckpt");
  const auto generated = planner::augment(dataset.pool, catalog, params,
                                          enc_layout, cfg.dataset.layout,
                                          dataset.train);
  const fs::path path = dataset_dir(cfg) / "augmented.jsonl";
  world::write_samples_jsonl(path, dataset, generated);
  std::cout << "augmented set: " << generated.size() << " samples -> "
            << path.string() << "\n";
  return 0;
}

int cmd_train_action(const RunConfig& cfg) {
  const auto catalog = grammar::load_catalog(cfg.catalog_dir);
  const auto dataset = load_dataset(cfg, catalog);
  std::vector<world::Sample> generated;
  if (cfg.augment) {
    generated =
        world::read_samples_jsonl(dataset_dir(cfg) / "augmented.jsonl");
  }

  planner::ActionTrainOptions options;
  options.sgd = cfg.sgd;
  options.epochs = cfg.augment ? cfg.action_epochs_aug : cfg.action_epochs;
  options.seed = cfg.seed;
  options.curriculum = cfg.curriculum;
  options.schedule = cfg.schedule;
  planner::TrainLog log;
  auto params = planner::train_action_planner(
      dataset.train, generated, cfg.dataset.layout,
      cfg.action_dims(cfg.dataset.layout.scene_feat_dim()), options, &log);

  const fs::path ckpt = cfg.out_dir / "checkpoints" / "action.ckpt";
  fs::create_directories(ckpt.parent_path());
  auto meta = nlohmann::json::parse(params.meta_json());
  meta.update(artifact_stamp(cfg, dataset));
  nn::save_checkpoint(ckpt, params.registry(), meta.dump());
  write_text(cfg.out_dir / "logs" / "action_train.csv", log.to_csv());
  std::cout << "action planner -> " << ckpt.string() << " (best epoch "
            << log.best_epoch << ")\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  const auto catalog = grammar::load_catalog(cfg.catalog_dir);
  const auto dataset = load_dataset(cfg, catalog);
  auto params =
      planner::load_action_planner(cfg.out_dir / "checkpoints" / "action.ckpt");

  std::vector<std::vector<AtomicAction>> preds, refs;
  preds.reserve(dataset.test.size());
  for (const auto& s : dataset.test) {
    preds.push_back(planner::decode(s.scene, s.task_id, params,
                                    cfg.dataset.layout, cfg.l_max)
                        .sequence);
    refs.push_back(s.sequence);
  }
  const auto ev = eval::score(preds, refs);
  nlohmann::json doc = nlohmann::json::parse(ev.to_json());
  doc.update(artifact_stamp(cfg, dataset));
  const fs::path out = cfg.out_dir / "reports" / "eval.json";
  write_text(out, doc.dump(2) + "\n");
  write_text(cfg.out_dir / "reports" / "eval_action_confusion.csv",
             ev.action_confusion.to_csv());
  write_text(cfg.out_dir / "reports" / "eval_object_confusion.csv",
             ev.object_confusion.to_csv());
  std::cout << "sequence accuracy: " << ev.sequence_accuracy << " -> "
            << out.string() << "\n";
  return 0;
}

int cmd_experiment(const RunConfig& cfg, const std::string& name) {
  auto kind = eval::experiment_from_name(name);
  if (!kind) {
    std::cerr << "error: unknown experiment '" << name << "'\n";
    return 2;
  }
  eval::Bench bench(cfg);
  const auto report = bench.run(*kind);
  const fs::path base = cfg.out_dir / "reports";
  write_text(base / (name + ".json"), report.to_json(2) + "\n");
  write_text(base / (name + ".csv"), report.to_csv());
  for (const auto& arm : report.arms) {
    write_text(base / (name + "_" + arm.name + "_action_confusion.csv"),
               arm.overall.action_confusion.to_csv());
    write_text(base / (name + "_" + arm.name + "_object_confusion.csv"),
               arm.overall.object_confusion.to_csv());
  }
  std::cout << report.to_csv();
  return 0;
}

int cmd_inspect_aog(const RunConfig& cfg, int task_id) {
  const auto catalog = grammar::load_catalog(cfg.catalog_dir);
  if (task_id < 0 || task_id >= static_cast<int>(catalog.size())) {
    std::cerr << "error: task id out of range\n";
    return 2;
  }
  const auto& aog = catalog[static_cast<std::size_t>(task_id)];
  std::cout << "task " << task_id << ": " << vocab::task_name(task_id) << "\n";

  std::function<void(grammar::NodeId, int)> dump = [&](grammar::NodeId id,
                                                       int depth) {
    const auto& node = aog.node(id);
    std::cout << std::string(static_cast<std::size_t>(depth) * 2, ' ');
    switch (node.kind) {
      case grammar::NodeKind::And: std::cout << "and"; break;
      case grammar::NodeKind::Or: std::cout << "or "; break;
      case grammar::NodeKind::Leaf: std::cout << "leaf"; break;
    }
    std::cout << " #" << id;
    if (node.action) std::cout << " " << node.action->to_string();
    if (!node.label.empty()) std::cout << "  [" << node.label << "]";
    std::cout << "\n";
    for (auto child : node.children) dump(child, depth + 1);
  };
  dump(aog.root, 0);
  std::cout << "nodes: " << aog.node_count()
            << ", or-nodes: " << grammar::or_node_order(aog).size()
            << ", sequences: " << grammar::count_sequences(aog) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"and-or-graph task planning toolkit"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_file, "JSON config file");
  app.add_option("--seed", flags.seed, "run seed (overrides config)");
  app.add_option("--profile", flags.profile, "desk | paper")
      ->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--out", flags.out_dir,
                 "output root (default $AOGPLAN_OUT_ROOT or ./out)");
  app.add_option("--catalog", flags.catalog_dir, "AOG catalog directory");
  app.add_option("--tau-init", flags.tau_init, "curriculum initial threshold");
  app.add_option("--tau-step", flags.tau_step, "curriculum threshold step");
  app.add_flag("--no-curriculum", flags.no_curriculum,
               "admit all generated samples from epoch 0");
  app.add_flag("--no-augment", flags.no_augment,
               "train the action planner on the annotated set only");
  app.add_option("--noise-ratio", flags.noise_ratio,
                 "target negative ratio for feature noise");

  auto* dataset = app.add_subcommand("dataset", "dataset stages");
  auto* dataset_gen = dataset->add_subcommand("gen", "generate the dataset");

  auto* train = app.add_subcommand("train", "training stages");
  auto* train_aog = train->add_subcommand("aog", "train the or-node selector");
  auto* train_action =
      train->add_subcommand("action", "train the action planner");

  auto* augment_cmd =
      app.add_subcommand("augment", "generate the augmented sample set");
  auto* eval_cmd = app.add_subcommand("eval", "evaluate the action planner");

  std::string experiment_name_arg;
  auto* experiment_cmd =
      app.add_subcommand("experiment", "run a named experiment");
  experiment_cmd->add_option("name", experiment_name_arg,
                             "main | generalization | self-aug | curriculum | "
                             "joint-head | noise")
      ->required();

  auto* inspect = app.add_subcommand("inspect", "inspection helpers");
  int inspect_task = -1;
  auto* inspect_aog = inspect->add_subcommand("aog", "pretty-print a task AOG");
  inspect_aog->add_option("task", inspect_task, "task id")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve_config(flags);
    if (dataset_gen->parsed()) return cmd_dataset_gen(cfg);
    if (train_aog->parsed()) return cmd_train_aog(cfg);
    if (train_action->parsed()) return cmd_train_action(cfg);
    if (augment_cmd->parsed()) return cmd_augment(cfg);
    if (eval_cmd->parsed()) return cmd_eval(cfg);
    if (experiment_cmd->parsed()) return cmd_experiment(cfg, experiment_name_arg);
    if (inspect_aog->parsed()) return cmd_inspect_aog(cfg, inspect_task);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
