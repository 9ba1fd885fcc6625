#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "apldf/drive_sim.hpp"
#include "apldf/metrics.hpp"
#include "apldf/planner.hpp"
#include "apldf/route_map.hpp"
#include "apldf/speed_profile.hpp"

namespace apldf {

/// Tuning of the speed profile adjustment.
struct StretchParams {
  double alpha = 0.5;            // stretch factor
  double cap_seconds = 3.0;      // max backward shift of d_0, in seconds at v_0
  double kappa_low = 0.005;      // 1/m, attenuation starts (R = 200 m)
  double kappa_high = 0.02;      // 1/m, stretching fully suppressed (R = 50 m)
  double deviation_eps = 0.15;   // m/s
  double merge_gap_m = 20.0;
  double sg_window_m = 51.0;
  int sg_order = 2;
  double set_speed_window_s = 5.0;  // "shortly after a new legal speed"
  double recovery_tol = 0.5;        // m/s, end of the post-intervention recovery
  std::optional<double> max_over_limit;  // m/s above the legal speed, unset = no clamp

  /// Odd number of grid points covered by the smoothing window.
  std::size_t sg_window_points(double grid_step) const;
  void validate(double grid_step) const;
};

/// Stretch factor after the time cap and the curvature attenuation.
double effective_alpha(const InterventionRecord& rec, double v0, const RouteMap& map,
                       const StretchParams& p);

/// d'_i = d_i - alpha_eff * (d_n - d_i); velocities unchanged.
std::vector<VelocitySample> stretch_intervention(std::span<const VelocitySample> samples,
                                                 double alpha_eff);

/// Adds a linearly decaying offset so the first sample meets the driver
/// profile at d'_0 while the last sample is unchanged.
std::vector<VelocitySample> align_offset(std::span<const VelocitySample> stretched,
                                         const SpeedProfile& v_driver);

/// Linear interpolation on a distance-ascending sample list.
double interpolate_samples(std::span<const VelocitySample> samples, double d);

/// Reference profile with each pedal intervention replaced by its stretched,
/// aligned samples followed by the recorded recovery back to the reference.
/// Later interventions overwrite earlier ones where spans overlap.
SpeedProfile build_prepro_profile(const DriveLog& log, const SpeedProfile& baseline,
                                  const RouteMap& map, const StretchParams& p);

/// Inclusive grid index range.
struct GridSegment {
  std::size_t first = 0;
  std::size_t last = 0;

  friend bool operator==(const GridSegment&, const GridSegment&) = default;
};

/// Maximal runs where |prepro - baseline| > deviation_eps, merged across gaps
/// shorter than merge_gap_m.
std::vector<GridSegment> deviation_segments(const SpeedProfile& baseline,
                                            const SpeedProfile& prepro, const StretchParams& p);

/// Pointwise mean of baseline and prepro inside the segments, baseline elsewhere.
SpeedProfile segment_mean(const SpeedProfile& baseline, const SpeedProfile& prepro,
                          std::span<const GridSegment> segments);

/// Mean of baseline and prepro inside deviation segments, smoothed and
/// spliced back into the baseline. Throws ValidationError on grid mismatch.
SpeedProfile blend(const SpeedProfile& baseline, const SpeedProfile& prepro,
                   const StretchParams& p);

/// Adopts this lap's set-speed records on top of `current` (summed where they
/// overlap). Within the lap, later records override earlier ones.
SetSpeedOffsetMap adopt_set_speed(const DriveLog& log, const RouteMap& map,
                                  const SetSpeedOffsetMap& current, const StretchParams& p);

struct SpaaConfig {
  PlannerParams planner;
  StretchParams stretch;
};

struct IterationRecord {
  std::size_t iteration = 0;
  SpeedProfile profile;
  std::optional<InterventionRates> rates;  // of the lap that produced it
  std::size_t interventions = 0;
};

/// Per-driver learning state. history is append-only; history[0] holds the
/// planner baseline.
struct IterationState {
  std::size_t iteration = 0;
  SpeedProfile baseline;
  SetSpeedOffsetMap offsets;
  std::vector<IterationRecord> history;

  static IterationState start(SpeedProfile baseline);
};

/// One learning step from a lap driven on state.baseline. An
/// intervention-free lap leaves the baseline bit-identical. Throws
/// ValidationError if the log is incomplete or belongs to another route.
IterationState apply_iteration(const IterationState& state, const DriveLog& log,
                               const RouteMap& map, const SpaaConfig& config);

}  // namespace apldf
