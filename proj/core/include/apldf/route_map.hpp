#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace apldf {

struct SpeedLimitZone {
  double start_m = 0.0;
  double limit_mps = 0.0;

  friend bool operator==(const SpeedLimitZone&, const SpeedLimitZone&) = default;
};

struct CurvatureSample {
  double d_m = 0.0;
  double kappa = 0.0;  // unsigned, 1/m

  friend bool operator==(const CurvatureSample&, const CurvatureSample&) = default;
};

/// Distance-parameterized road: legal limit zones tiling [0, length) and a
/// piecewise-linear curvature profile. Immutable once constructed.
class RouteMap {
 public:
  /// Validates all invariants; throws ValidationError naming the offending
  /// element.
  RouteMap(std::string name, double length_m, std::vector<SpeedLimitZone> zones,
           std::vector<CurvatureSample> curvature);

  const std::string& name() const { return name_; }
  double length() const { return length_; }
  const std::vector<SpeedLimitZone>& zones() const { return zones_; }
  const std::vector<CurvatureSample>& curvature() const { return curvature_; }

  /// Limit of the zone containing d. Zones are half-open [start, next_start),
  /// so a sign takes effect exactly at its position. Domain: [0, length).
  double legal_speed(double d) const;

  /// Linear interpolation between bracketing samples, clamped to the last
  /// sample value beyond it. Domain: [0, length].
  double curvature_at(double d) const;

  /// Index of the zone containing d. Unlike legal_speed, d == length maps to
  /// the last zone.
  std::size_t zone_index(double d) const;
  double zone_start(std::size_t index) const { return zones_.at(index).start_m; }
  /// Exclusive end of a zone: next zone start, or route length.
  double zone_end(std::size_t index) const;

  /// Largest curvature on [from, to], both clamped to the route.
  double max_curvature(double from, double to) const;

  friend bool operator==(const RouteMap&, const RouteMap&) = default;

 private:
  std::string name_;
  double length_;
  std::vector<SpeedLimitZone> zones_;
  std::vector<CurvatureSample> curvature_;
};

/// Parses the JSON route format. Limits are given in km/h and converted to m/s.
RouteMap load_route(std::string_view source);
RouteMap load_route_file(const std::filesystem::path& path);
std::string serialize_route(const RouteMap& map);

}  // namespace apldf
