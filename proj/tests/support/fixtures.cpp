#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "apldf/planner.hpp"
#include "apldf/units.hpp"

namespace fixtures {

using namespace apldf;

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

RouteMap random_route(Rng& rng, double max_length) {
  const double length = std::round(uniform(rng, 200.0, max_length));
  static constexpr double kLimits[] = {40, 50, 60, 70, 80, 100};
  const int zones = uniform_int(rng, 1, 4);
  std::vector<SpeedLimitZone> z;
  double start = 0.0;
  for (int k = 0; k < zones; ++k) {
    z.push_back({start, kmh_to_mps(kLimits[uniform_int(rng, 0, 5)])});
    start += std::round(uniform(rng, 50.0, length / zones));
    if (start >= length - 20.0) break;
  }
  std::vector<CurvatureSample> c{{0.0, 0.0}};
  const int bumps = uniform_int(rng, 0, 2);
  double d = 0.0;
  for (int k = 0; k < bumps; ++k) {
    const double a = d + uniform(rng, 20.0, 80.0);
    const double b = a + uniform(rng, 10.0, 60.0);
    if (b + 10.0 >= length) break;
    const double kappa = uniform(rng, 0.001, 0.03);
    c.push_back({a, 0.0});
    c.push_back({0.5 * (a + b), kappa});
    c.push_back({b, 0.0});
    d = b;
  }
  return RouteMap("rand", length, std::move(z), std::move(c));
}

std::vector<ScriptAction> random_script(Rng& rng, const RouteMap& map, int max_interventions,
                                        bool allow_lever) {
  std::vector<ScriptAction> acts;
  const int count = uniform_int(rng, 0, max_interventions);
  const double len = map.length();
  for (int k = 0; k < count; ++k) {
    const int kind = uniform_int(rng, 0, allow_lever ? 2 : 1);
    const double from = uniform(rng, 15.0, len - 70.0);
    if (kind == 0) {
      const double to = from + uniform(rng, 5.0, 60.0);
      acts.push_back({ScriptAction::Type::gas, from, to, false, uniform(rng, 0.15, 0.8), 0});
    } else if (kind == 1) {
      const double to = from + uniform(rng, 3.0, 20.0);
      acts.push_back({ScriptAction::Type::brake, from, to, false, uniform(rng, 0.05, 0.25), 0});
      acts.push_back({ScriptAction::Type::reactivate, to + uniform(rng, 2.0, 8.0), 0.0, false, 0.0, 0});
    } else {
      const int steps = uniform_int(rng, 0, 1) == 0 ? -1 : 1;
      acts.push_back({ScriptAction::Type::lever, from, 0.0, false, 0.0, steps});
    }
  }
  return acts;
}

Instance random_instance(Rng& rng, int max_interventions, bool allow_lever) {
  SimParams sim;
  sim.max_lap_time_s = 600.0;
  for (;;) {
    RouteMap map = random_route(rng);
    SpeedProfile base = plan_base_profile(map, PlannerParams{});
    ScriptedInputSource script(random_script(rng, map, max_interventions, allow_lever));
    DriveLog log = run_lap(map, base, script, sim, "baseline");
    if (log.complete) return {std::move(map), std::move(base), std::move(log)};
  }
}

std::vector<VelocitySample> random_samples(Rng& rng, std::size_t max_n) {
  const auto n = static_cast<std::size_t>(uniform_int(rng, 2, static_cast<int>(max_n)));
  std::vector<VelocitySample> s;
  double d = uniform(rng, 0.0, 2000.0);
  double v = uniform(rng, 5.0, 30.0);
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back({d, v});
    d += uniform(rng, 0.05, 2.0);
    v = std::max(0.0, v + uniform(rng, -0.5, 0.5));
  }
  return s;
}

SpeedProfile random_profile(Rng& rng, double length) {
  const std::size_t n = grid_points(length, 1.0);
  const double base = uniform(rng, 10.0, 30.0);
  const double amp = uniform(rng, 0.0, 5.0);
  const double freq = uniform(rng, 0.001, 0.02);
  const double phase = uniform(rng, 0.0, 6.28);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = base + amp * std::sin(freq * static_cast<double>(i) + phase);
  return SpeedProfile(0.0, 1.0, std::move(v));
}

std::filesystem::path data_dir() { return APLDF_TEST_DATA_DIR; }
std::filesystem::path golden_dir() { return APLDF_TEST_GOLDEN_DIR; }

}  // namespace fixtures
