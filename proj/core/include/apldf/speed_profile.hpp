#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace apldf {

class RouteMap;

/// Velocity over a uniform distance grid: values[i] is the speed at
/// start + i * step.
class SpeedProfile {
 public:
  SpeedProfile(double start_m, double step_m, std::vector<double> values_mps);

  /// Constant profile covering [0, length] of a route.
  static SpeedProfile constant_on(const RouteMap& map, double step_m, double value_mps);

  double start() const { return start_; }
  double step() const { return step_; }
  std::size_t size() const { return values_.size(); }
  double end() const { return distance_at(values_.size() - 1); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double distance_at(std::size_t i) const { return start_ + static_cast<double>(i) * step_; }

  /// Linear interpolation, clamped to the end values outside the grid.
  double at(double d) const;

  bool same_grid(const SpeedProfile& other) const;

  friend bool operator==(const SpeedProfile&, const SpeedProfile&) = default;

 private:
  double start_;
  double step_;
  std::vector<double> values_;
};

/// Number of grid points covering [0, length] at the given step.
std::size_t grid_points(double length_m, double step_m);

/// CSV with header d_m,v_mps,v_kmh and one row per grid point.
std::string profile_to_csv(const SpeedProfile& profile);
SpeedProfile profile_from_csv(std::string_view csv);

}  // namespace apldf
