#pragma once

#include <span>
#include <string>
#include <vector>

#include "apldf/drive_sim.hpp"
#include "apldf/speed_profile.hpp"

namespace apldf {

/// Fractions of a lap's driven time during which the function was
/// intervened in.
struct InterventionRates {
  double pedal_ir = 0.0;      // gas or brake active
  double set_speed_ir = 0.0;  // an offset set on this lap is active
  double combined_ir = 0.0;   // any intervention active (union of time)
  double lap_time = 0.0;

  friend bool operator==(const InterventionRates&, const InterventionRates&) = default;
};

/// Throws ValidationError for an incomplete log.
InterventionRates intervention_rates(const DriveLog& log);

std::vector<InterventionRates> ir_evolution(std::span<const DriveLog> history);

/// Field-wise mean; all zero for an empty input.
InterventionRates mean_rates(std::span<const InterventionRates> rates);

/// Root mean squared pointwise difference. Throws ValidationError on grid
/// mismatch.
double profile_rmse(const SpeedProfile& a, const SpeedProfile& b);

struct RateRow {
  std::string driver_id;
  std::size_t lap = 0;
  InterventionRates rates;
};

/// driver_id,lap,pedal_ir,set_speed_ir,combined_ir,lap_time_s
std::string rates_to_csv(std::span<const RateRow> rows);

}  // namespace apldf
