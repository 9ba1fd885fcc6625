#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "apldf/drive_sim.hpp"
#include "apldf/planner.hpp"
#include "apldf/route_map.hpp"
#include "apldf/speed_profile.hpp"

namespace apldf {

/// How a synthetic driver's preferred speed deviates from the PLDF baseline.
/// Counts select random curves/transitions/zones; the seed fixes the choice.
struct PerturbationSpec {
  int curves = 0;                 // curve speeds shifted by +-[curve_delta_kmh_min, max]
  double curve_delta_kmh_min = 5.0;
  double curve_delta_kmh_max = 15.0;
  int transitions = 0;            // limit changes moved by +-[shift_m_min, max]
  double shift_m_min = 50.0;
  double shift_m_max = 150.0;
  int straights = 0;              // zones offset by one of -10/-5/+5/+10 km/h
  double all_straights_kmh = 0.0; // fixed offset on every zone
  double accel_scale = 1.0;       // preferred acceleration strength
  double decel_scale = 1.0;       // preferred deceleration strength

  bool is_identity() const;
};

struct DriverParams {
  double tol = 1.0;             // m/s acceptance band
  double react_delay = 0.7;     // s before acting on a persistent error
  double release_delay = 0.3;   // s between the error crossing zero and pedal release
  double overreact_gain = 1.4;  // pedal gain multiplier, >= 1
  bool set_speed_user = false;  // prefers the lever on straights
  double noise_mps = 0.0;       // per-lap preference jitter amplitude, 0 = off
};

struct PreferenceProfile {
  SpeedProfile v_pref;
  DriverParams params;
};

/// Baseline shifted by the difference between the planner run on perturbed
/// and on nominal constraints. Deterministic per seed; an identity spec
/// returns the baseline bit-identical.
PreferenceProfile make_preference(const RouteMap& map, const SpeedProfile& baseline,
                                  const PerturbationSpec& spec, std::uint64_t seed,
                                  const PlannerParams& planner = {},
                                  const DriverParams& params = {});

/// Delayed, overreactive driver closing the loop around the simulation.
class SyntheticDriver final : public InputSource {
 public:
  SyntheticDriver(const RouteMap& map, PreferenceProfile pref, const SimParams& sim,
                  std::uint64_t noise_seed = 0);

  const PreferenceProfile& preference() const { return pref_; }

  void reset() override;
  DriverInputs next(const SimState& state) override;

 private:
  enum class Mode { idle, gas, brake, await_reactivate };

  double preferred(double d) const;
  bool lever_region(const SimState& state) const;

  const RouteMap* map_;
  PreferenceProfile pref_;
  SimParams sim_;
  std::uint64_t noise_seed_;
  std::uint64_t lap_ = 0;
  double noise_amp_ = 0.0;
  double noise_phase_ = 0.0;

  Mode mode_ = Mode::idle;
  std::optional<double> error_since_;
  std::optional<double> crossed_at_;
  double released_at_ = 0.0;
};

}  // namespace apldf
