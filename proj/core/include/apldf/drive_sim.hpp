#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "apldf/planner.hpp"
#include "apldf/route_map.hpp"
#include "apldf/speed_profile.hpp"

namespace apldf {

struct SimParams {
  double dt = 0.02;               // s, fixed tick (50 Hz)
  double gas_accel_max = 2.5;     // m/s^2 at full pedal
  double brake_decel_max = 4.0;   // m/s^2 at full pedal
  double drag_decel = 0.3;        // m/s^2 while coasting
  double kp = 2.0;                // 1/s, tracking gain
  double preview_s = 0.5;         // target read-ahead time
  double ctrl_accel_max = 1.2;    // tracking controller clamp, m/s^2
  double ctrl_decel_max = 1.5;    // tracking controller clamp, m/s^2
  double lateral_accel_max = 3.0; // curve cap applied to set-speed offsets
  double max_lap_time_s = 3600.0; // safety stop; lap flagged incomplete

  /// Controller clamps taken from the planner comfort limits.
  static SimParams matching(const PlannerParams& planner);
  double tick_hz() const { return 1.0 / dt; }
  void validate() const;
};

struct SimState {
  double t = 0.0;
  double d = 0.0;
  double v = 0.0;
  bool pldf_active = true;
  double gas = 0.0;
  double brake = 0.0;
  double set_speed_offset = 0.0;  // m/s, multiple of 5 km/h
  double active_limit = 0.0;
  double target_v = 0.0;
  std::size_t zone = 0;

  friend bool operator==(const SimState&, const SimState&) = default;
};

struct DriverInputs {
  double gas = 0.0;
  double brake = 0.0;
  int lever_steps = 0;  // signed number of 5 km/h lever clicks
  bool reactivate = false;
  bool abort = false;
};

enum class InterventionKind { gas, brake, set_speed };

const char* to_string(InterventionKind kind);
InterventionKind intervention_kind_from(const std::string& name);

struct VelocitySample {
  double d_m = 0.0;
  double v_mps = 0.0;

  friend bool operator==(const VelocitySample&, const VelocitySample&) = default;
};

/// One driver takeover. samples[0] is the state at the moment the
/// intervention began; the remaining samples follow at tick resolution.
struct InterventionRecord {
  InterventionKind kind = InterventionKind::gas;
  double d_start = 0.0;
  double d_end = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double offset_mps = 0.0;  // set_speed only
  std::vector<VelocitySample> samples;

  double duration() const { return t_end - t_start; }
  bool is_pedal() const { return kind != InterventionKind::set_speed; }

  friend bool operator==(const InterventionRecord&, const InterventionRecord&) = default;
};

/// Discrete driver actions, kept so a lap can be replayed tick-exactly.
struct DriveEvent {
  enum class Type { lever, reactivate };
  std::size_t tick = 0;  // applied before integrating this tick
  Type type = Type::lever;
  int steps = 0;

  friend bool operator==(const DriveEvent&, const DriveEvent&) = default;
};

struct DriveLog {
  std::string route_name;
  std::string profile_id;
  double tick_hz = 50.0;
  /// states[0] is the initial state; states[k] the state after tick k, with
  /// the pedal inputs applied during that tick.
  std::vector<SimState> states;
  std::vector<InterventionRecord> interventions;
  std::vector<DriveEvent> events;
  double lap_time = 0.0;
  bool complete = false;

  friend bool operator==(const DriveLog&, const DriveLog&) = default;
};

/// Pure physics tick: pedal overrides, PLDF tracking controller or coasting,
/// semi-implicit Euler integration, zone bookkeeping. Inputs are clamped.
SimState step(const SimState& state, const DriverInputs& inputs, const SpeedProfile& profile,
              const RouteMap& map, const SimParams& params);

/// Throws StateError while the brake is pressed.
SimState reactivate_pldf(const SimState& state);
/// Adds steps * 5 km/h to the set-speed offset. Throws StateError when the
/// PLDF is inactive.
SimState adjust_set_speed(const SimState& state, int steps);

/// Initial state at d = 0 travelling at the profile speed.
SimState initial_state(const SpeedProfile& profile, const RouteMap& map, const SimParams& params);

/// Supplies driver inputs once per tick.
class InputSource {
 public:
  virtual ~InputSource() = default;
  virtual void reset() {}
  virtual DriverInputs next(const SimState& state) = 0;
};

/// Never intervenes.
class NullInputSource final : public InputSource {
 public:
  DriverInputs next(const SimState&) override { return {}; }
};

/// Distance- or time-triggered pedal windows and lever/reactivate actions.
struct ScriptAction {
  enum class Type { gas, brake, lever, reactivate };
  Type type = Type::gas;
  double from = 0.0;  // window start (pedals) or trigger point
  double to = 0.0;    // window end (pedals)
  bool by_time = false;
  double value = 0.0;  // pedal position
  int steps = 0;       // lever clicks
};

class ScriptedInputSource final : public InputSource {
 public:
  explicit ScriptedInputSource(std::vector<ScriptAction> actions);
  void reset() override;
  DriverInputs next(const SimState& state) override;
  const std::vector<ScriptAction>& actions() const { return actions_; }

 private:
  std::vector<ScriptAction> actions_;
  std::vector<char> fired_;
};

/// Replays the pedal inputs and events recorded in a full-rate log.
class ReplayInputSource final : public InputSource {
 public:
  explicit ReplayInputSource(const DriveLog& log);
  void reset() override { tick_ = 0; }
  DriverInputs next(const SimState& state) override;

 private:
  const DriveLog* log_;
  std::size_t tick_ = 0;
};

/// Stateful single-lap simulation that records interventions.
class Simulation {
 public:
  Simulation(const RouteMap& map, const SpeedProfile& profile, SimParams params,
             std::string profile_id);

  const SimState& state() const { return state_; }
  const RouteMap& map() const { return *map_; }
  const SpeedProfile& profile() const { return *profile_; }
  const SimParams& params() const { return params_; }
  std::size_t ticks() const { return log_.states.size() - 1; }
  bool finished() const;
  /// True when any intervention is currently open.
  bool intervening() const;

  /// Throws StateError while the brake is pressed. No-op when already active.
  void reactivate_pldf();
  /// Throws StateError when the PLDF is inactive.
  void adjust_set_speed(int steps);
  /// Applies lever/reactivate requests (invalid ones are ignored) and
  /// integrates one tick.
  void apply(const DriverInputs& inputs);

  /// Closes open records and returns the log. The simulation is spent.
  DriveLog finish(bool complete);

 private:
  void open_record(InterventionKind kind, double offset);
  void close_record(std::optional<std::size_t>& slot);
  void sample_open_records();

  const RouteMap* map_;
  const SpeedProfile* profile_;
  SimParams params_;
  SimState state_;
  DriveLog log_;
  std::optional<std::size_t> open_gas_, open_brake_, open_set_;
};

/// Full lap from d = 0 to the route end. An abort request or the lap time
/// limit produces a log flagged incomplete.
DriveLog run_lap(const RouteMap& map, const SpeedProfile& profile, InputSource& inputs,
                 const SimParams& params, std::string profile_id = "baseline");

/// Driver speed over distance, resampled to the given grid.
SpeedProfile driver_trace(const DriveLog& log, const SpeedProfile& grid);

}  // namespace apldf
