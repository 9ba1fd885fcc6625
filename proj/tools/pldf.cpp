// pldf: batch experiments on the adaptive PLDF.
//
//   pldf plan   --route r.json [--params p.json] [--offset zone:kmh]... [--out base.csv]
//   pldf study  --route r.json --cohort c.json [--laps 2] [--seed 1] [--out dir]
//   pldf replay --log lap.json --route r.json [--profile p.csv] [--out new.csv]
//   pldf drive  --route r.json [--script s.json] [--profile p.csv] [--out lap.json]
//
// Exit codes: 0 ok, 2 invalid input, 1 anything else.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "apldf/drive_sim.hpp"
#include "apldf/error.hpp"
#include "apldf/io.hpp"
#include "apldf/planner.hpp"
#include "apldf/route_map.hpp"
#include "apldf/spaa.hpp"
#include "apldf/study.hpp"
#include "apldf/units.hpp"

namespace {

using namespace apldf;

constexpr int kExitInvalid = 2;

struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunParams load_params(const std::string& path) {
  if (path.empty()) return {};
  return run_params_from_json(read_text_file(path));
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    write_text_file(out, text);
  }
}

SetSpeedOffset parse_offset(const std::string& spec, const RouteMap& map) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidInput("--offset expects zone:kmh, got '" + spec + "'");
  std::size_t zone = 0;
  double kmh = 0.0;
  try {
    zone = std::stoul(spec.substr(0, colon));
    kmh = std::stod(spec.substr(colon + 1));
  } catch (const std::exception&) {
    throw InvalidInput("--offset expects zone:kmh, got '" + spec + "'");
  }
  if (zone >= map.zones().size()) {
    throw InvalidInput("--offset zone " + std::to_string(zone) + " out of range (route has " +
                       std::to_string(map.zones().size()) + " zones)");
  }
  return {map.zone_start(zone), map.zone_end(zone), kmh_to_mps(kmh), true};
}

struct PlanArgs {
  std::string route, params, out;
  std::vector<std::string> offsets;
};

int cmd_plan(const PlanArgs& a) {
  const RouteMap map = load_route_file(a.route);
  const RunParams params = load_params(a.params);
  SpeedProfile profile = plan_base_profile(map, params.planner);
  if (!a.offsets.empty()) {
    SetSpeedOffsetMap offsets;
    for (const auto& s : a.offsets) offsets.overwrite(parse_offset(s, map));
    profile = apply_set_speed_offsets(profile, map, offsets, params.planner);
  }
  emit(a.out, profile_to_csv(profile));
  return 0;
}

struct StudyArgs {
  std::string route, cohort, params, out = "out";
  std::size_t laps = 2;
  std::uint64_t seed = 1;
  std::optional<double> max_over_limit_kmh;
  std::size_t workers = 0;
  bool full_rate = false;
};

int cmd_study(StudyArgs a) {
  if (const char* env = std::getenv("ADAPTIVE_PLDF_SEED"); env && *env) {
    try {
      a.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw InvalidInput(std::string("ADAPTIVE_PLDF_SEED is not an integer: '") + env + "'");
    }
  }
  if (a.laps == 0) throw InvalidInput("--laps must be at least 1");
  const RouteMap map = load_route_file(a.route);
  const auto cohort = cohort_from_json(read_text_file(a.cohort));
  StudyConfig config;
  config.params = load_params(a.params);
  if (a.max_over_limit_kmh) config.params.stretch.max_over_limit = kmh_to_mps(*a.max_over_limit_kmh);
  config.laps_per_system = a.laps;
  config.master_seed = a.seed;
  config.workers = a.workers;
  const StudyResult result = run_study(map, cohort, config);
  write_study(a.out, result, config, a.full_rate);

  std::size_t failed = 0;
  for (const auto& d : result.drivers) {
    if (!d.ok) {
      ++failed;
      std::cerr << "driver " << d.member.id << " failed: " << d.error << '\n';
    }
  }
  std::cerr << "study: " << result.drivers.size() << " drivers, " << failed << " failed, written to "
            << a.out << '\n';
  return 0;
}

struct ReplayArgs {
  std::string log, route, params, profile, out;
};

int cmd_replay(const ReplayArgs& a) {
  const RouteMap map = load_route_file(a.route);
  const RunParams params = load_params(a.params);
  const DriveLog log = drive_log_from_json(read_text_file(a.log));
  if (!log.complete) throw InvalidInput("log is truncated (lap did not finish)");
  if (log.route_name != map.name()) {
    throw InvalidInput("log was recorded on route '" + log.route_name + "', not '" + map.name() + "'");
  }
  const SpeedProfile baseline = a.profile.empty() ? plan_base_profile(map, params.planner)
                                                  : profile_from_csv(read_text_file(a.profile));
  const auto state = IterationState::start(baseline);
  const auto next = apply_iteration(state, log, map, params.spaa());
  emit(a.out, profile_to_csv(next.baseline));
  return 0;
}

struct DriveArgs {
  std::string route, params, script, profile, out;
  double tick_hz = 0.0;
  bool downsample = false;
};

int cmd_drive(const DriveArgs& a) {
  const RouteMap map = load_route_file(a.route);
  RunParams params = load_params(a.params);
  if (a.tick_hz > 0.0) params.sim.dt = 1.0 / a.tick_hz;
  params.sim.validate();
  const SpeedProfile profile = a.profile.empty()
                                   ? plan_base_profile(map, params.planner)
                                   : profile_from_csv(read_text_file(a.profile));
  std::string profile_id = a.profile.empty() ? "baseline" : a.profile;
  DriveLog log;
  if (a.script.empty()) {
    NullInputSource none;
    log = run_lap(map, profile, none, params.sim, profile_id);
  } else {
    ScriptedInputSource scripted(script_from_json(read_text_file(a.script)));
    log = run_lap(map, profile, scripted, params.sim, profile_id);
  }
  emit(a.out, drive_log_to_json(log, a.downsample));
  std::cerr << "lap_time " << log.lap_time << " s, " << log.interventions.size()
            << " interventions\n";
  return log.complete ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive predictive longitudinal driving function: batch tools"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Plan the base speed profile of a route (CSV)");
  plan_cmd->add_option("--route", plan.route, "Route JSON")->required();
  plan_cmd->add_option("--params", plan.params, "Parameter JSON (planner/spaa/sim)");
  plan_cmd->add_option("--offset", plan.offsets, "Set-speed offset zone:kmh, repeatable");
  plan_cmd->add_option("--out", plan.out, "Output CSV (default stdout)");

  StudyArgs study;
  auto* study_cmd = app.add_subcommand("study", "Run a synthetic cohort through the A/B protocol");
  study_cmd->add_option("--route", study.route, "Route JSON")->required();
  study_cmd->add_option("--cohort", study.cohort, "Cohort JSON")->required();
  study_cmd->add_option("--laps", study.laps, "Laps with interventions per system");
  study_cmd->add_option("--seed", study.seed, "Master seed (ADAPTIVE_PLDF_SEED overrides)");
  study_cmd->add_option("--params", study.params, "Parameter JSON (planner/spaa/sim)");
  study_cmd->add_option("--max-over-limit", study.max_over_limit_kmh,
                        "Clamp learned speeds to limit + this many km/h");
  study_cmd->add_option("--workers", study.workers, "Worker threads (0 = all cores)");
  study_cmd->add_flag("--full-rate-logs", study.full_rate, "Write lap logs at tick rate");
  study_cmd->add_option("--out", study.out, "Output directory");

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "Apply one SPAA step to a stored lap log");
  replay_cmd->add_option("--log", replay.log, "Drive log JSON")->required();
  replay_cmd->add_option("--route", replay.route, "Route JSON")->required();
  replay_cmd->add_option("--params", replay.params, "Parameter JSON (planner/spaa/sim)");
  replay_cmd->add_option("--profile", replay.profile, "Profile the lap was driven on (default: base)");
  replay_cmd->add_option("--out", replay.out, "Output CSV (default stdout)");

  DriveArgs drive;
  auto* drive_cmd = app.add_subcommand("drive", "Simulate one lap with scripted or no inputs");
  drive_cmd->add_option("--route", drive.route, "Route JSON")->required();
  drive_cmd->add_option("--params", drive.params, "Parameter JSON (planner/spaa/sim)");
  drive_cmd->add_option("--script", drive.script, "Input script JSON (default: no inputs)");
  drive_cmd->add_option("--profile", drive.profile, "Profile CSV (default: base profile)");
  drive_cmd->add_option("--tick-hz", drive.tick_hz, "Simulation rate");
  drive_cmd->add_flag("--downsample", drive.downsample, "Write states at 10 Hz");
  drive_cmd->add_option("--out", drive.out, "Output log JSON (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plan_cmd) return cmd_plan(plan);
    if (*study_cmd) return cmd_study(study);
    if (*replay_cmd) return cmd_replay(replay);
    if (*drive_cmd) return cmd_drive(drive);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
