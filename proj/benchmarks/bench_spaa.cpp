#include <benchmark/benchmark.h>

#include "apldf/drive_sim.hpp"
#include "apldf/io.hpp"
#include "apldf/planner.hpp"
#include "apldf/spaa.hpp"

namespace {

struct TwoDrop {
  apldf::RouteMap map;
  apldf::SpeedProfile base;
  apldf::DriveLog log;
};

const TwoDrop& two_drop() {
  static const TwoDrop f = [] {
    auto map = apldf::load_route_file(APLDF_BENCH_DATA_DIR "/two_drop_route.json");
    auto base = apldf::plan_base_profile(map, {});
    apldf::ScriptedInputSource script(
        apldf::script_from_json(apldf::read_text_file(APLDF_BENCH_DATA_DIR "/two_drop_script.json")));
    auto log = apldf::run_lap(map, base, script, {});
    return TwoDrop{std::move(map), std::move(base), std::move(log)};
  }();
  return f;
}

void BM_Prepro(benchmark::State& state) {
  const auto& f = two_drop();
  for (auto _ : state) {
    benchmark::DoNotOptimize(apldf::build_prepro_profile(f.log, f.base, f.map, {}));
  }
}
BENCHMARK(BM_Prepro);

void BM_Blend(benchmark::State& state) {
  const auto& f = two_drop();
  const auto prepro = apldf::build_prepro_profile(f.log, f.base, f.map, {});
  for (auto _ : state) benchmark::DoNotOptimize(apldf::blend(f.base, prepro, {}));
}
BENCHMARK(BM_Blend);

void BM_ApplyIteration(benchmark::State& state) {
  const auto& f = two_drop();
  const auto start = apldf::IterationState::start(f.base);
  for (auto _ : state) benchmark::DoNotOptimize(apldf::apply_iteration(start, f.log, f.map, {}));
}
BENCHMARK(BM_ApplyIteration);

}  // namespace
