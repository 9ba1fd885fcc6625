#include "apldf/study.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include <nlohmann/json.hpp>

#include "apldf/planner.hpp"

namespace apldf {

using nlohmann::json;

namespace {

InterventionRates mean_over(const std::vector<StudyLap>& laps, bool adaptive) {
  std::vector<InterventionRates> r;
  for (const auto& lap : laps) {
    if (lap.adaptive == adaptive && lap.with_interventions) r.push_back(lap.rates);
  }
  return mean_rates(r);
}

json rates_json(const InterventionRates& r) {
  return {{"pedal_ir", r.pedal_ir},
          {"set_speed_ir", r.set_speed_ir},
          {"combined_ir", r.combined_ir},
          {"lap_time_s", r.lap_time}};
}

}  // namespace

InterventionRates DriverOutcome::static_mean() const { return mean_over(laps, false); }
InterventionRates DriverOutcome::adaptive_mean() const { return mean_over(laps, true); }

std::uint64_t driver_seed(std::uint64_t master_seed, std::uint64_t member_seed) {
  // splitmix64 finalizer over the combined seeds
  std::uint64_t z = master_seed * 0x9E3779B97F4A7C15ULL + member_seed;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

DriverOutcome run_driver(const RouteMap& map, const SpeedProfile& base, const CohortMember& member,
                         const StudyConfig& config) {
  DriverOutcome out;
  out.member = member;
  try {
    const auto& params = config.params;
    const std::uint64_t seed = driver_seed(config.master_seed, member.seed);
    out.preference = make_preference(map, base, member.perturbation, seed, params.planner,
                                     member.driver);
    SyntheticDriver driver(map, *out.preference, params.sim, seed);
    NullInputSource idle;

    auto drive = [&](const SpeedProfile& profile, InputSource& src, std::string label,
                     bool adaptive, bool interventions) {
      DriveLog log = run_lap(map, profile, src, params.sim, label);
      if (!log.complete) throw std::runtime_error("lap " + label + " did not complete");
      StudyLap lap{label, adaptive, interventions, std::move(log), {}};
      lap.rates = intervention_rates(lap.log);
      out.laps.push_back(std::move(lap));
      return out.laps.size() - 1;
    };

    const std::size_t k = std::max<std::size_t>(1, config.laps_per_system);
    std::size_t last_static = 0;
    for (std::size_t i = 1; i <= k; ++i) {
      last_static = drive(base, driver, "A" + std::to_string(i), false, true);
    }
    drive(base, idle, "A-final", false, false);

    IterationState state = IterationState::start(base);
    state = apply_iteration(state, out.laps[last_static].log, map, params.spaa());
    for (std::size_t i = 1; i <= k; ++i) {
      const SpeedProfile profile = state.baseline;
      const std::size_t lap = drive(profile, driver, "B" + std::to_string(i), true, true);
      state = apply_iteration(state, out.laps[lap].log, map, params.spaa());
    }
    drive(state.baseline, idle, "B-final", true, false);

    for (const auto& h : state.history) {
      out.rmse_by_iteration.push_back(profile_rmse(h.profile, out.preference->v_pref));
    }
    out.learning = std::move(state);
    out.ok = true;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

StudyResult run_study(const RouteMap& map, const std::vector<CohortMember>& cohort,
                      const StudyConfig& config) {
  StudyResult result{map.name(), plan_base_profile(map, config.params.planner), {}};
  result.drivers.resize(cohort.size());
  std::size_t workers = config.workers;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(1, cohort.size()));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cohort.size(); i = next++) {
      result.drivers[i] = run_driver(map, result.base_profile, cohort[i], config);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return result;
}

std::string study_summary_json(const StudyResult& result, const StudyConfig& config) {
  json doc;
  doc["route"] = result.route_name;
  doc["master_seed"] = config.master_seed;
  doc["laps_per_system"] = config.laps_per_system;
  doc["params"] = json::parse(run_params_to_json(config.params));

  std::vector<InterventionRates> stat, adap;
  std::size_t rmse_decreasing = 0, ok = 0;
  auto& drivers = doc["drivers"] = json::array();
  auto& failures = doc["failures"] = json::array();
  for (const auto& d : result.drivers) {
    if (!d.ok) {
      failures.push_back({{"driver_id", d.member.id}, {"error", d.error}});
      continue;
    }
    ++ok;
    stat.push_back(d.static_mean());
    adap.push_back(d.adaptive_mean());
    // Strictly decreasing over iterations 0 -> 2.
    const auto& r = d.rmse_by_iteration;
    const bool decreasing = r.size() >= 3 && r[1] < r[0] && r[2] < r[1];
    if (decreasing) ++rmse_decreasing;
    json laps = json::array();
    for (const auto& lap : d.laps) {
      laps.push_back({{"label", lap.label}, {"rates", rates_json(lap.rates)}});
    }
    drivers.push_back({{"driver_id", d.member.id},
                       {"static_mean", rates_json(d.static_mean())},
                       {"adaptive_mean", rates_json(d.adaptive_mean())},
                       {"rmse_by_iteration", r},
                       {"rmse_decreasing_0_2", decreasing},
                       {"laps", std::move(laps)}});
  }
  const auto s = mean_rates(stat);
  const auto a = mean_rates(adap);
  doc["cohort"] = {
      {"drivers_ok", ok},
      {"drivers_failed", result.drivers.size() - ok},
      {"static_mean", rates_json(s)},
      {"adaptive_mean", rates_json(a)},
      {"combined_ir_ratio", s.combined_ir > 0.0 ? json(a.combined_ir / s.combined_ir) : json(nullptr)},
      {"rmse_decreasing_fraction",
       ok > 0 ? static_cast<double>(rmse_decreasing) / static_cast<double>(ok) : 0.0}};
  return doc.dump(2);
}

void write_study(const std::filesystem::path& out_dir, const StudyResult& result,
                 const StudyConfig& config, bool full_rate_logs) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<RateRow> rows;
  write_text_file(out_dir / "profiles" / "base.csv", profile_to_csv(result.base_profile));
  for (const auto& d : result.drivers) {
    const fs::path dir = out_dir / d.member.id;
    for (std::size_t k = 0; k < d.laps.size(); ++k) {
      const auto& lap = d.laps[k];
      write_text_file(dir / ("lap" + std::to_string(k + 1) + ".json"),
                      drive_log_to_json(lap.log, !full_rate_logs));
      rows.push_back({d.member.id, k + 1, lap.rates});
    }
    if (d.preference) write_text_file(dir / "v_pref.csv", profile_to_csv(d.preference->v_pref));
    if (d.learning) {
      for (const auto& h : d.learning->history) {
        write_text_file(dir / "profiles" / ("iter" + std::to_string(h.iteration) + ".csv"),
                        profile_to_csv(h.profile));
      }
      write_text_file(dir / "manifest.json",
                      history_manifest_json(*d.learning, config.params, "profiles/iter"));
    }
  }
  write_text_file(out_dir / "ir_evolution.csv", rates_to_csv(rows));
  write_text_file(out_dir / "summary.json", study_summary_json(result, config));
}

}  // namespace apldf
