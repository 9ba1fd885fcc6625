#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "apldf/drive_sim.hpp"
#include "apldf/driver_model.hpp"
#include "apldf/io.hpp"
#include "apldf/metrics.hpp"
#include "apldf/route_map.hpp"
#include "apldf/spaa.hpp"

namespace apldf {

/// Static-vs-adaptive protocol: per driver, laps A1..Ak on the fixed
/// baseline plus one intervention-free lap; the adaptive function is
/// pre-trained on lap Ak, then laps B1..Bk each followed by a learning step,
/// plus one intervention-free lap on the final profile.
struct StudyConfig {
  RunParams params;
  std::size_t laps_per_system = 2;
  std::uint64_t master_seed = 1;
  std::size_t workers = 0;  // 0 = hardware concurrency
};

struct StudyLap {
  std::string label;  // A1, A2, A-final, B1, B2, B-final
  bool adaptive = false;
  bool with_interventions = true;
  DriveLog log;
  InterventionRates rates;
};

struct DriverOutcome {
  CohortMember member;
  bool ok = false;
  std::string error;
  std::optional<PreferenceProfile> preference;
  std::vector<StudyLap> laps;
  std::optional<IterationState> learning;
  std::vector<double> rmse_by_iteration;  // profile_rmse(baseline_i, v_pref)

  InterventionRates static_mean() const;
  InterventionRates adaptive_mean() const;
};

struct StudyResult {
  std::string route_name;
  SpeedProfile base_profile;
  std::vector<DriverOutcome> drivers;
};

/// Seed actually used for a driver's preference draw.
std::uint64_t driver_seed(std::uint64_t master_seed, std::uint64_t member_seed);

DriverOutcome run_driver(const RouteMap& map, const SpeedProfile& base, const CohortMember& member,
                         const StudyConfig& config);

/// Drivers run on a worker pool; each driver's laps are sequential. Output
/// order follows the cohort order.
StudyResult run_study(const RouteMap& map, const std::vector<CohortMember>& cohort,
                      const StudyConfig& config);

/// Writes <out>/<driver>/lap<k>.json, <out>/<driver>/profiles/iter<i>.csv,
/// <out>/<driver>/manifest.json, <out>/ir_evolution.csv and <out>/summary.json.
void write_study(const std::filesystem::path& out_dir, const StudyResult& result,
                 const StudyConfig& config, bool full_rate_logs = false);

/// summary.json content (cohort means, convergence statistics, failures).
std::string study_summary_json(const StudyResult& result, const StudyConfig& config);

}  // namespace apldf
