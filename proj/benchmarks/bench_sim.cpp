#include <benchmark/benchmark.h>

#include "apldf/drive_sim.hpp"
#include "apldf/planner.hpp"

namespace {

void BM_RunNullLap(benchmark::State& state) {
  const auto map = apldf::load_route_file(APLDF_BENCH_DATA_DIR "/demo_route.json");
  const auto base = apldf::plan_base_profile(map, {});
  apldf::SimParams sim;
  sim.dt = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    apldf::NullInputSource none;
    benchmark::DoNotOptimize(apldf::run_lap(map, base, none, sim));
  }
}
BENCHMARK(BM_RunNullLap)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
