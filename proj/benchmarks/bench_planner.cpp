#include <benchmark/benchmark.h>

#include "apldf/planner.hpp"
#include "apldf/route_map.hpp"

namespace {

const apldf::RouteMap& demo() {
  static const auto map = apldf::load_route_file(APLDF_BENCH_DATA_DIR "/demo_route.json");
  return map;
}

void BM_PlanBaseProfile(benchmark::State& state) {
  apldf::PlannerParams p;
  p.grid_step = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(apldf::plan_base_profile(demo(), p));
}
BENCHMARK(BM_PlanBaseProfile)->Arg(10)->Arg(5)->Arg(1);

void BM_ApplyOffsets(benchmark::State& state) {
  const auto base = apldf::plan_base_profile(demo(), {});
  apldf::SetSpeedOffsetMap offsets;
  for (std::size_t z = 0; z < demo().zones().size(); z += 2) {
    offsets.overwrite({demo().zone_start(z), demo().zone_end(z), 1.4, true});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(apldf::apply_set_speed_offsets(base, demo(), offsets, {}));
  }
}
BENCHMARK(BM_ApplyOffsets);

}  // namespace
