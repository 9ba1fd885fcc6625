#pragma once

#include <span>
#include <vector>

#include "apldf/route_map.hpp"
#include "apldf/speed_profile.hpp"

namespace apldf {

/// Comfort limits of the predictive longitudinal function.
struct PlannerParams {
  double accel_max = 1.2;          // m/s^2
  double decel_max = 1.5;          // m/s^2, positive
  double lateral_accel_max = 3.0;  // m/s^2
  double grid_step = 1.0;          // m

  /// Throws ValidationError unless all values are positive and grid_step <= 5 m.
  void validate() const;
};

/// One adopted set-speed adjustment over [start_m, end_m).
struct SetSpeedOffset {
  double start_m = 0.0;
  double end_m = 0.0;
  double offset_mps = 0.0;
  bool whole_segment = false;

  friend bool operator==(const SetSpeedOffset&, const SetSpeedOffset&) = default;
};

/// Non-overlapping, distance-ordered set-speed offsets along a route.
class SetSpeedOffsetMap {
 public:
  SetSpeedOffsetMap() = default;

  const std::vector<SetSpeedOffset>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Inserts an entry; overlapping parts of existing entries are replaced.
  void overwrite(const SetSpeedOffset& entry);
  /// Inserts an entry; overlapping parts are summed with existing entries.
  void accumulate(const SetSpeedOffset& entry);

  /// Offset active at d (0 when no entry covers d).
  double offset_at(double d) const;

  friend bool operator==(const SetSpeedOffsetMap&, const SetSpeedOffsetMap&) = default;

 private:
  void insert_sorted(const SetSpeedOffset& entry);
  void coalesce();
  std::vector<SetSpeedOffset> entries_;
};

/// Steady-state curve speed sqrt(a_lat / kappa); kMaxSpeedMps on straights.
double curve_speed_limit(double kappa, const PlannerParams& params);

/// Set speed shifted by an offset. Positive offsets never push a speed above
/// the curve cap unless the profile already exceeds it.
double offset_target(double profile_mps, double offset_mps, double curve_cap_mps);

/// Pointwise min(legal speed, curve speed, cap) on the route grid.
std::vector<double> pointwise_targets(const RouteMap& map, const PlannerParams& params);

/// Backward pass (predictive deceleration: v_i^2 <= v_{i+1}^2 + 2 a_dec step)
/// then forward pass (v_{i+1}^2 <= v_i^2 + 2 a_acc step). In place.
void enforce_kinematics(std::span<double> v, double step, double accel_max, double decel_max);

SpeedProfile plan_base_profile(const RouteMap& map, const PlannerParams& params);

/// Shifts the profile inside each offset span and re-runs the kinematic
/// passes. Only the spans and the ramps they induce change; the rest of the
/// profile is returned bit-identical. Throws RangeError for spans outside the
/// route.
SpeedProfile apply_set_speed_offsets(const SpeedProfile& profile, const RouteMap& map,
                                     const SetSpeedOffsetMap& offsets,
                                     const PlannerParams& params);

}  // namespace apldf
