#include "apldf/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "apldf/error.hpp"
#include "apldf/units.hpp"

namespace apldf {

using nlohmann::json;

namespace {

json parse_doc(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json state_row(const SimState& s) {
  return json::array({s.t, s.d, s.v, s.pldf_active, s.gas, s.brake, s.set_speed_offset,
                      s.active_limit, s.target_v, s.zone});
}

SimState state_from_row(const json& r) {
  if (!r.is_array() || r.size() != 10) throw ParseError("drive log: malformed state row");
  SimState s;
  s.t = r[0].get<double>();
  s.d = r[1].get<double>();
  s.v = r[2].get<double>();
  s.pldf_active = r[3].get<bool>();
  s.gas = r[4].get<double>();
  s.brake = r[5].get<double>();
  s.set_speed_offset = r[6].get<double>();
  s.active_limit = r[7].get<double>();
  s.target_v = r[8].get<double>();
  s.zone = r[9].get<std::size_t>();
  return s;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string drive_log_to_json(const DriveLog& log, bool downsample_10hz) {
  json doc;
  doc["route"] = log.route_name;
  doc["profile_id"] = log.profile_id;
  doc["tick_hz"] = log.tick_hz;
  doc["lap_time_s"] = log.lap_time;
  doc["complete"] = log.complete;
  doc["state_fields"] = {"t",      "d_m",      "v_mps",    "pldf_active", "gas",
                         "brake",  "offset_mps", "limit_mps", "target_mps", "zone"};
  const std::size_t stride =
      downsample_10hz ? std::max<std::size_t>(1, std::lround(log.tick_hz / 10.0)) : 1;
  doc["states_stride"] = stride;
  auto& states = doc["states"] = json::array();
  for (std::size_t i = 0; i < log.states.size(); ++i) {
    if (i % stride == 0 || i + 1 == log.states.size()) states.push_back(state_row(log.states[i]));
  }
  auto& recs = doc["interventions"] = json::array();
  for (const auto& r : log.interventions) {
    json samples = json::array();
    for (const auto& s : r.samples) samples.push_back({s.d_m, s.v_mps});
    recs.push_back({{"kind", to_string(r.kind)},
                    {"d_start", r.d_start},
                    {"d_end", r.d_end},
                    {"t_start", r.t_start},
                    {"t_end", r.t_end},
                    {"offset_mps", r.offset_mps},
                    {"samples", std::move(samples)}});
  }
  auto& events = doc["events"] = json::array();
  for (const auto& e : log.events) {
    events.push_back({{"tick", e.tick},
                      {"type", e.type == DriveEvent::Type::lever ? "lever" : "reactivate"},
                      {"steps", e.steps}});
  }
  return doc.dump();
}

DriveLog drive_log_from_json(std::string_view text) {
  const json doc = parse_doc(text, "drive log");
  try {
    DriveLog log;
    log.route_name = doc.at("route").get<std::string>();
    log.profile_id = doc.at("profile_id").get<std::string>();
    log.tick_hz = doc.at("tick_hz").get<double>();
    log.lap_time = doc.at("lap_time_s").get<double>();
    log.complete = doc.at("complete").get<bool>();
    for (const auto& r : doc.at("states")) log.states.push_back(state_from_row(r));
    for (const auto& r : doc.at("interventions")) {
      InterventionRecord rec;
      rec.kind = intervention_kind_from(r.at("kind").get<std::string>());
      rec.d_start = r.at("d_start").get<double>();
      rec.d_end = r.at("d_end").get<double>();
      rec.t_start = r.at("t_start").get<double>();
      rec.t_end = r.at("t_end").get<double>();
      rec.offset_mps = r.at("offset_mps").get<double>();
      for (const auto& s : r.at("samples")) {
        rec.samples.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
      }
      log.interventions.push_back(std::move(rec));
    }
    if (doc.contains("events")) {
      for (const auto& e : doc.at("events")) {
        DriveEvent ev;
        ev.tick = e.at("tick").get<std::size_t>();
        const auto type = e.at("type").get<std::string>();
        if (type == "lever") ev.type = DriveEvent::Type::lever;
        else if (type == "reactivate") ev.type = DriveEvent::Type::reactivate;
        else throw ParseError("drive log: unknown event type '" + type + "'");
        ev.steps = e.value("steps", 0);
        log.events.push_back(ev);
      }
    }
    if (log.states.empty()) throw ParseError("drive log: no states");
    return log;
  } catch (const json::exception& e) {
    throw ParseError(std::string("drive log: ") + e.what());
  }
}

RunParams run_params_from_json(std::string_view text) {
  const json doc = parse_doc(text, "params");
  RunParams p;
  try {
    if (doc.contains("planner")) {
      const auto& j = doc.at("planner");
      read_opt(j, "accel_max", p.planner.accel_max);
      read_opt(j, "decel_max", p.planner.decel_max);
      read_opt(j, "lateral_accel_max", p.planner.lateral_accel_max);
      read_opt(j, "grid_step", p.planner.grid_step);
    }
    if (doc.contains("spaa")) {
      const auto& j = doc.at("spaa");
      read_opt(j, "alpha", p.stretch.alpha);
      read_opt(j, "cap_seconds", p.stretch.cap_seconds);
      read_opt(j, "kappa_low", p.stretch.kappa_low);
      read_opt(j, "kappa_high", p.stretch.kappa_high);
      read_opt(j, "deviation_eps", p.stretch.deviation_eps);
      read_opt(j, "merge_gap_m", p.stretch.merge_gap_m);
      read_opt(j, "sg_window_m", p.stretch.sg_window_m);
      read_opt(j, "sg_order", p.stretch.sg_order);
      read_opt(j, "set_speed_window_s", p.stretch.set_speed_window_s);
      read_opt(j, "recovery_tol", p.stretch.recovery_tol);
      if (j.contains("max_over_limit_kmh") && !j.at("max_over_limit_kmh").is_null()) {
        p.stretch.max_over_limit = kmh_to_mps(j.at("max_over_limit_kmh").get<double>());
      }
    }
    p.sim = SimParams::matching(p.planner);
    if (doc.contains("sim")) {
      const auto& j = doc.at("sim");
      if (j.contains("tick_hz")) p.sim.dt = 1.0 / j.at("tick_hz").get<double>();
      read_opt(j, "gas_accel_max", p.sim.gas_accel_max);
      read_opt(j, "brake_decel_max", p.sim.brake_decel_max);
      read_opt(j, "drag_decel", p.sim.drag_decel);
      read_opt(j, "kp", p.sim.kp);
      read_opt(j, "preview_s", p.sim.preview_s);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("params: ") + e.what());
  }
  p.planner.validate();
  p.stretch.validate(p.planner.grid_step);
  p.sim.validate();
  return p;
}

std::string run_params_to_json(const RunParams& p) {
  json doc;
  doc["planner"] = {{"accel_max", p.planner.accel_max},
                    {"decel_max", p.planner.decel_max},
                    {"lateral_accel_max", p.planner.lateral_accel_max},
                    {"grid_step", p.planner.grid_step}};
  doc["spaa"] = {{"alpha", p.stretch.alpha},
                 {"cap_seconds", p.stretch.cap_seconds},
                 {"kappa_low", p.stretch.kappa_low},
                 {"kappa_high", p.stretch.kappa_high},
                 {"deviation_eps", p.stretch.deviation_eps},
                 {"merge_gap_m", p.stretch.merge_gap_m},
                 {"sg_window_m", p.stretch.sg_window_m},
                 {"sg_order", p.stretch.sg_order},
                 {"set_speed_window_s", p.stretch.set_speed_window_s},
                 {"recovery_tol", p.stretch.recovery_tol},
                 {"max_over_limit_kmh", p.stretch.max_over_limit
                                            ? json(mps_to_kmh(*p.stretch.max_over_limit))
                                            : json(nullptr)}};
  doc["sim"] = {{"tick_hz", p.sim.tick_hz()},
                {"gas_accel_max", p.sim.gas_accel_max},
                {"brake_decel_max", p.sim.brake_decel_max},
                {"drag_decel", p.sim.drag_decel},
                {"kp", p.sim.kp},
                {"preview_s", p.sim.preview_s}};
  return doc.dump(2);
}

std::vector<ScriptAction> script_from_json(std::string_view text) {
  const json doc = parse_doc(text, "script");
  std::vector<ScriptAction> out;
  try {
    for (const auto& a : doc.at("actions")) {
      ScriptAction act;
      const auto type = a.at("type").get<std::string>();
      act.by_time = a.contains("from_s") || a.contains("at_s");
      const char* from_key = act.by_time ? "from_s" : "from_m";
      const char* to_key = act.by_time ? "to_s" : "to_m";
      const char* at_key = act.by_time ? "at_s" : "at_m";
      if (type == "gas" || type == "brake") {
        act.type = type == "gas" ? ScriptAction::Type::gas : ScriptAction::Type::brake;
        act.from = a.at(from_key).get<double>();
        act.to = a.at(to_key).get<double>();
        act.value = a.value("value", 1.0);
      } else if (type == "lever") {
        act.type = ScriptAction::Type::lever;
        act.from = a.at(at_key).get<double>();
        act.steps = a.at("steps").get<int>();
      } else if (type == "reactivate") {
        act.type = ScriptAction::Type::reactivate;
        act.from = a.at(at_key).get<double>();
      } else {
        throw ParseError("script: unknown action type '" + type + "'");
      }
      out.push_back(act);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("script: ") + e.what());
  }
  return out;
}

std::vector<CohortMember> cohort_from_json(std::string_view text) {
  const json doc = parse_doc(text, "cohort");
  std::vector<CohortMember> out;
  try {
    for (const auto& d : doc.at("drivers")) {
      CohortMember m;
      m.id = d.at("id").get<std::string>();
      m.seed = d.at("seed").get<std::uint64_t>();
      if (d.contains("perturbation")) {
        const auto& p = d.at("perturbation");
        read_opt(p, "curves", m.perturbation.curves);
        read_opt(p, "curve_delta_kmh_min", m.perturbation.curve_delta_kmh_min);
        read_opt(p, "curve_delta_kmh_max", m.perturbation.curve_delta_kmh_max);
        read_opt(p, "transitions", m.perturbation.transitions);
        read_opt(p, "shift_m_min", m.perturbation.shift_m_min);
        read_opt(p, "shift_m_max", m.perturbation.shift_m_max);
        read_opt(p, "straights", m.perturbation.straights);
        read_opt(p, "all_straights_kmh", m.perturbation.all_straights_kmh);
        read_opt(p, "accel_scale", m.perturbation.accel_scale);
        read_opt(p, "decel_scale", m.perturbation.decel_scale);
      }
      if (d.contains("driver")) {
        const auto& p = d.at("driver");
        read_opt(p, "tol", m.driver.tol);
        read_opt(p, "react_delay", m.driver.react_delay);
        read_opt(p, "release_delay", m.driver.release_delay);
        read_opt(p, "overreact_gain", m.driver.overreact_gain);
        read_opt(p, "set_speed_user", m.driver.set_speed_user);
        read_opt(p, "noise_mps", m.driver.noise_mps);
      }
      if (!(m.driver.tol > 0.0) || m.driver.react_delay < 0.0 || m.driver.overreact_gain < 1.0) {
        throw ValidationError("cohort: driver '" + m.id + "' has invalid behaviour parameters");
      }
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("cohort: ") + e.what());
  }
  return out;
}

std::string rates_to_json(const InterventionRates& r) {
  return json{{"pedal_ir", r.pedal_ir},
              {"set_speed_ir", r.set_speed_ir},
              {"combined_ir", r.combined_ir},
              {"lap_time_s", r.lap_time}}
      .dump();
}

std::string history_manifest_json(const IterationState& state, const RunParams& params,
                                  const std::string& profile_prefix) {
  json doc;
  doc["iteration"] = state.iteration;
  doc["params"] = json::parse(run_params_to_json(params));
  auto& its = doc["iterations"] = json::array();
  for (const auto& h : state.history) {
    json entry{{"iteration", h.iteration},
               {"profile", profile_prefix + std::to_string(h.iteration) + ".csv"},
               {"interventions", h.interventions}};
    entry["rates"] = h.rates ? json::parse(rates_to_json(*h.rates)) : json(nullptr);
    its.push_back(std::move(entry));
  }
  auto& offs = doc["set_speed_offsets"] = json::array();
  for (const auto& e : state.offsets.entries()) {
    offs.push_back({{"start_m", e.start_m},
                    {"end_m", e.end_m},
                    {"offset_kmh", mps_to_kmh(e.offset_mps)},
                    {"whole_segment", e.whole_segment}});
  }
  return doc.dump(2);
}

}  // namespace apldf
