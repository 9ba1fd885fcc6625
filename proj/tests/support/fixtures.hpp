#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "apldf/drive_sim.hpp"
#include "apldf/route_map.hpp"
#include "apldf/speed_profile.hpp"

namespace fixtures {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);

/// Route of 200..max_length m with 1..4 zones (40..100 km/h) and a few
/// curvature bumps.
apldf::RouteMap random_route(Rng& rng, double max_length = 500.0);

/// Up to max_interventions scripted gas, brake (+reactivation) and lever
/// actions placed on the route.
std::vector<apldf::ScriptAction> random_script(Rng& rng, const apldf::RouteMap& map,
                                               int max_interventions = 3,
                                               bool allow_lever = true);

struct Instance {
  apldf::RouteMap map;
  apldf::SpeedProfile baseline;
  apldf::DriveLog log;
};

/// Random route plus a completed lap on its base profile. Retries until the
/// scripted lap completes.
Instance random_instance(Rng& rng, int max_interventions = 3, bool allow_lever = true);

/// Ascending random sample list of 2..max_n points.
std::vector<apldf::VelocitySample> random_samples(Rng& rng, std::size_t max_n = 60);

/// Smooth random profile on [0, length] at 1 m.
apldf::SpeedProfile random_profile(Rng& rng, double length);

std::filesystem::path data_dir();
std::filesystem::path golden_dir();

}  // namespace fixtures
