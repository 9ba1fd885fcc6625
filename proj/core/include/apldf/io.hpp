#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "apldf/drive_sim.hpp"
#include "apldf/driver_model.hpp"
#include "apldf/metrics.hpp"
#include "apldf/spaa.hpp"

namespace apldf {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Drive log JSON. States can be decimated to 10 Hz; intervention samples are
/// always kept at full resolution.
std::string drive_log_to_json(const DriveLog& log, bool downsample_10hz = false);
/// Throws ParseError for malformed or truncated documents.
DriveLog drive_log_from_json(std::string_view text);

/// Planner, SPAA and simulation parameters from one JSON document with
/// optional "planner", "spaa" and "sim" objects. Missing keys keep defaults.
struct RunParams {
  PlannerParams planner;
  StretchParams stretch;
  SimParams sim;

  SpaaConfig spaa() const { return {planner, stretch}; }
};
RunParams run_params_from_json(std::string_view text);
std::string run_params_to_json(const RunParams& params);

/// {"actions": [{"type": "gas", "from_m": .., "to_m": .., "value": ..}, ...]}
/// Time-triggered actions use from_s/to_s/at_s instead of the _m keys.
std::vector<ScriptAction> script_from_json(std::string_view text);

struct CohortMember {
  std::string id;
  std::uint64_t seed = 0;
  PerturbationSpec perturbation;
  DriverParams driver;
};
/// {"drivers": [{"id", "seed", "perturbation": {...}, "driver": {...}}]}
std::vector<CohortMember> cohort_from_json(std::string_view text);

std::string rates_to_json(const InterventionRates& rates);

/// Iteration history manifest: one entry per iteration with its profile file
/// name and the rates of the lap that produced it.
std::string history_manifest_json(const IterationState& state, const RunParams& params,
                                  const std::string& profile_prefix = "iter");

}  // namespace apldf
