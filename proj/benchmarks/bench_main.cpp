#include <benchmark/benchmark.h>

#include "aogplan/aog_planner.hpp"
#include "aogplan/catalog.hpp"
#include "aogplan/oracle.hpp"
#include "aogplan/scene_gen.hpp"

namespace {

using namespace aogplan;

const std::vector<grammar::TaskAog>& catalog() {
  static const auto c = grammar::load_catalog(AOGPLAN_CATALOG_DIR);
  return c;
}

void BM_EncodeAog(benchmark::State& state) {
  const auto layout = grammar::layout_for(catalog());
  const auto& aog = catalog()[1];  // largest graph
  for (auto _ : state) {
    benchmark::DoNotOptimize(grammar::encode_aog(aog, layout));
  }
}
BENCHMARK(BM_EncodeAog);

void BM_GenerateScene(benchmark::State& state) {
  Rng rng(42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        world::generate_scene(rng, world::Environment::Kitchen));
  }
}
BENCHMARK(BM_GenerateScene);

void BM_OraclePlan(benchmark::State& state) {
  Rng rng(42);
  const auto scene = world::generate_scene(rng, world::Environment::Kitchen);
  const auto& aog = catalog()[6];
  for (auto _ : state) {
    benchmark::DoNotOptimize(world::oracle_plan(scene, aog));
  }
}
BENCHMARK(BM_OraclePlan);

void BM_LstmStep(benchmark::State& state) {
  const auto h = static_cast<std::size_t>(state.range(0));
  nn::LstmCellParams params;
  params.resize(h, h);
  Rng rng(1);
  nn::init_uniform_fan(rng, params.Wx, h, h);
  nn::init_uniform_fan(rng, params.Wh, h, h);
  std::vector<double> x(h, 0.1), hprev(h, 0.0), cprev(h, 0.0);
  nn::LstmStepCache cache;
  for (auto _ : state) {
    nn::lstm_step(params, x, hprev, cprev, cache);
    benchmark::DoNotOptimize(cache.h.data());
  }
}
BENCHMARK(BM_LstmStep)->Arg(64)->Arg(256);

void BM_AogGenerate(benchmark::State& state) {
  const auto enc_layout = grammar::layout_for(catalog());
  world::SceneLayout scene_layout;
  planner::AogPlannerDims dims;
  dims.scene_dim = scene_layout.scene_feat_dim();
  dims.aog_dim = enc_layout.total_dim();
  auto params = planner::AogPlannerParams::sized_like(dims);
  Rng rng(3);
  params.init(rng);
  const auto scene = world::generate_scene(rng, world::Environment::Kitchen);
  for (auto _ : state) {
    benchmark::DoNotOptimize(planner::generate_sample(
        scene, catalog()[6], params, enc_layout, scene_layout));
  }
}
BENCHMARK(BM_AogGenerate);

}  // namespace

BENCHMARK_MAIN();
