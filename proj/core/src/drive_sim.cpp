#include "apldf/drive_sim.hpp"

#include <algorithm>
#include <cmath>

#include "apldf/error.hpp"
#include "apldf/units.hpp"

namespace apldf {
namespace {

constexpr double kLeverStepMps = kmh_to_mps(5.0);

double clamp01(double x) { return std::isfinite(x) ? std::clamp(x, 0.0, 1.0) : 0.0; }

double limit_of_zone(const RouteMap& map, std::size_t zone) { return map.zones()[zone].limit_mps; }

// Set speed the PLDF tracks from the given state.
double control_target(const SimState& s, const SpeedProfile& profile, const RouteMap& map,
                      const SimParams& p) {
  const double dp = s.d + s.v * p.preview_s;
  const double base = profile.at(dp);
  if (s.set_speed_offset == 0.0) return base;
  const double kappa = map.curvature_at(std::clamp(dp, 0.0, map.length()));
  PlannerParams lat;
  lat.lateral_accel_max = p.lateral_accel_max;
  return offset_target(base, s.set_speed_offset, curve_speed_limit(kappa, lat));
}

}  // namespace

SimParams SimParams::matching(const PlannerParams& planner) {
  SimParams p;
  p.ctrl_accel_max = planner.accel_max;
  p.ctrl_decel_max = planner.decel_max;
  p.lateral_accel_max = planner.lateral_accel_max;
  return p;
}

void SimParams::validate() const {
  if (!(dt > 0.0) || !(gas_accel_max > 0.0) || !(brake_decel_max > 0.0) || drag_decel < 0.0 ||
      !(kp > 0.0) || preview_s < 0.0 || !(ctrl_accel_max > 0.0) || !(ctrl_decel_max > 0.0) ||
      !(max_lap_time_s > 0.0)) {
    throw ValidationError("invalid simulation parameters");
  }
}

const char* to_string(InterventionKind kind) {
  switch (kind) {
    case InterventionKind::gas: return "gas";
    case InterventionKind::brake: return "brake";
    case InterventionKind::set_speed: return "set_speed";
  }
  return "?";
}

InterventionKind intervention_kind_from(const std::string& name) {
  if (name == "gas") return InterventionKind::gas;
  if (name == "brake") return InterventionKind::brake;
  if (name == "set_speed") return InterventionKind::set_speed;
  throw ParseError("unknown intervention kind '" + name + "'");
}

SimState step(const SimState& state, const DriverInputs& inputs, const SpeedProfile& profile,
              const RouteMap& map, const SimParams& params) {
  SimState s = state;
  s.gas = clamp01(inputs.gas);
  s.brake = clamp01(inputs.brake);

  double a = 0.0;
  if (s.brake > 0.0) {
    a = -s.brake * params.brake_decel_max;
    s.pldf_active = false;
    s.set_speed_offset = 0.0;
  } else if (s.gas > 0.0) {
    a = s.gas * params.gas_accel_max;
  } else if (s.pldf_active) {
    const double target = control_target(state, profile, map, params);
    a = std::clamp(params.kp * (target - state.v), -params.ctrl_decel_max, params.ctrl_accel_max);
  } else {
    a = -params.drag_decel;
  }

  s.v = std::max(0.0, state.v + a * params.dt);
  s.d = state.d + s.v * params.dt;
  s.t = state.t + params.dt;

  const std::size_t zone = map.zone_index(std::min(s.d, map.length()));
  if (zone != s.zone) {
    s.set_speed_offset = 0.0;
    s.zone = zone;
  }
  s.active_limit = limit_of_zone(map, s.zone);
  s.target_v = control_target(s, profile, map, params);
  return s;
}

SimState reactivate_pldf(const SimState& state) {
  if (state.brake > 0.0) throw StateError("cannot reactivate PLDF while the brake is pressed");
  SimState s = state;
  s.pldf_active = true;
  return s;
}

SimState adjust_set_speed(const SimState& state, int steps) {
  if (!state.pldf_active) throw StateError("set speed lever requires an active PLDF");
  SimState s = state;
  s.set_speed_offset += steps * kLeverStepMps;
  // Snap to exact quanta so repeated presses never drift.
  const double quanta = std::round(s.set_speed_offset / kLeverStepMps);
  s.set_speed_offset = quanta == 0.0 ? 0.0 : quanta * kLeverStepMps;
  return s;
}

SimState initial_state(const SpeedProfile& profile, const RouteMap& map, const SimParams& params) {
  SimState s;
  s.v = profile.at(0.0);
  s.zone = 0;
  s.active_limit = limit_of_zone(map, 0);
  s.target_v = control_target(s, profile, map, params);
  return s;
}

// -- Input sources -----------------------------------------------------------

ScriptedInputSource::ScriptedInputSource(std::vector<ScriptAction> actions)
    : actions_(std::move(actions)), fired_(actions_.size(), 0) {}

void ScriptedInputSource::reset() { std::fill(fired_.begin(), fired_.end(), 0); }

DriverInputs ScriptedInputSource::next(const SimState& state) {
  DriverInputs in;
  for (std::size_t i = 0; i < actions_.size(); ++i) {
    const auto& a = actions_[i];
    const double x = a.by_time ? state.t : state.d;
    switch (a.type) {
      case ScriptAction::Type::gas:
        if (x >= a.from && x < a.to) in.gas = std::max(in.gas, a.value);
        break;
      case ScriptAction::Type::brake:
        if (x >= a.from && x < a.to) in.brake = std::max(in.brake, a.value);
        break;
      case ScriptAction::Type::lever:
        if (!fired_[i] && x >= a.from) {
          fired_[i] = 1;
          in.lever_steps += a.steps;
        }
        break;
      case ScriptAction::Type::reactivate:
        if (!fired_[i] && x >= a.from) {
          fired_[i] = 1;
          in.reactivate = true;
        }
        break;
    }
  }
  return in;
}

ReplayInputSource::ReplayInputSource(const DriveLog& log) : log_(&log) {}

DriverInputs ReplayInputSource::next(const SimState&) {
  DriverInputs in;
  const std::size_t k = tick_ + 1;
  if (k < log_->states.size()) {
    in.gas = log_->states[k].gas;
    in.brake = log_->states[k].brake;
  }
  for (const auto& e : log_->events) {
    if (e.tick != tick_) continue;
    if (e.type == DriveEvent::Type::lever) in.lever_steps += e.steps;
    else in.reactivate = true;
  }
  ++tick_;
  return in;
}

// -- Simulation --------------------------------------------------------------

Simulation::Simulation(const RouteMap& map, const SpeedProfile& profile, SimParams params,
                       std::string profile_id)
    : map_(&map), profile_(&profile), params_(params) {
  params_.validate();
  state_ = initial_state(profile, map, params_);
  log_.route_name = map.name();
  log_.profile_id = std::move(profile_id);
  log_.tick_hz = params_.tick_hz();
  log_.states.push_back(state_);
}

bool Simulation::finished() const { return state_.d >= map_->length(); }

bool Simulation::intervening() const {
  return open_gas_.has_value() || open_brake_.has_value() || open_set_.has_value();
}

void Simulation::open_record(InterventionKind kind, double offset) {
  InterventionRecord rec;
  rec.kind = kind;
  rec.d_start = rec.d_end = state_.d;
  rec.t_start = rec.t_end = state_.t;
  rec.offset_mps = offset;
  rec.samples.push_back({state_.d, state_.v});
  log_.interventions.push_back(std::move(rec));
  const std::size_t idx = log_.interventions.size() - 1;
  switch (kind) {
    case InterventionKind::gas: open_gas_ = idx; break;
    case InterventionKind::brake: open_brake_ = idx; break;
    case InterventionKind::set_speed: open_set_ = idx; break;
  }
}

void Simulation::close_record(std::optional<std::size_t>& slot) { slot.reset(); }

void Simulation::sample_open_records() {
  for (auto* slot : {&open_gas_, &open_brake_, &open_set_}) {
    if (!slot->has_value()) continue;
    auto& rec = log_.interventions[**slot];
    rec.samples.push_back({state_.d, state_.v});
    rec.d_end = state_.d;
    rec.t_end = state_.t;
  }
}

void Simulation::reactivate_pldf() {
  if (state_.pldf_active) return;
  state_ = apldf::reactivate_pldf(state_);
  close_record(open_brake_);
  log_.events.push_back({ticks(), DriveEvent::Type::reactivate, 0});
}

void Simulation::adjust_set_speed(int steps) {
  if (steps == 0) return;
  state_ = apldf::adjust_set_speed(state_, steps);
  close_record(open_set_);
  if (state_.set_speed_offset != 0.0) {
    open_record(InterventionKind::set_speed, state_.set_speed_offset);
  }
  log_.events.push_back({ticks(), DriveEvent::Type::lever, steps});
}

void Simulation::apply(const DriverInputs& inputs) {
  const double gas = clamp01(inputs.gas);
  const double brake = clamp01(inputs.brake);
  if (inputs.reactivate && !state_.pldf_active && brake == 0.0 && state_.brake == 0.0) {
    reactivate_pldf();
  }
  if (inputs.lever_steps != 0 && state_.pldf_active && brake == 0.0) {
    adjust_set_speed(inputs.lever_steps);
  }

  if (gas > 0.0 && !open_gas_) open_record(InterventionKind::gas, 0.0);
  if (gas == 0.0 && open_gas_) close_record(open_gas_);
  if (brake > 0.0 && !open_brake_) open_record(InterventionKind::brake, 0.0);

  const double offset_before = state_.set_speed_offset;
  DriverInputs in = inputs;
  in.gas = gas;
  in.brake = brake;
  state_ = step(state_, in, *profile_, *map_, params_);
  state_.t = static_cast<double>(log_.states.size()) * params_.dt;  // no drift over long laps
  sample_open_records();
  if (offset_before != 0.0 && state_.set_speed_offset == 0.0) close_record(open_set_);
  log_.states.push_back(state_);
}

DriveLog Simulation::finish(bool complete) {
  close_record(open_gas_);
  close_record(open_brake_);
  close_record(open_set_);
  log_.lap_time = state_.t;
  log_.complete = complete;
  return std::move(log_);
}

DriveLog run_lap(const RouteMap& map, const SpeedProfile& profile, InputSource& inputs,
                 const SimParams& params, std::string profile_id) {
  Simulation sim(map, profile, params, std::move(profile_id));
  inputs.reset();
  while (!sim.finished()) {
    if (sim.state().t >= params.max_lap_time_s) return sim.finish(false);
    const DriverInputs in = inputs.next(sim.state());
    if (in.abort) return sim.finish(false);
    sim.apply(in);
  }
  return sim.finish(true);
}

SpeedProfile driver_trace(const DriveLog& log, const SpeedProfile& grid) {
  std::vector<double> ds, vs;
  ds.reserve(log.states.size());
  vs.reserve(log.states.size());
  for (const auto& s : log.states) {
    if (!ds.empty() && !(s.d > ds.back())) continue;
    ds.push_back(s.d);
    vs.push_back(s.v);
  }
  if (ds.empty()) throw ValidationError("drive log has no states");
  std::vector<double> out(grid.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = grid.distance_at(i);
    if (d <= ds.front()) {
      out[i] = vs.front();
      continue;
    }
    if (d >= ds.back()) {
      out[i] = vs.back();
      continue;
    }
    while (ds[j + 1] < d) ++j;
    const double t = (d - ds[j]) / (ds[j + 1] - ds[j]);
    out[i] = (1.0 - t) * vs[j] + t * vs[j + 1];
  }
  return SpeedProfile(grid.start(), grid.step(), std::move(out));
}

}  // namespace apldf
