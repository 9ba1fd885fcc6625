#include "apldf/speed_profile.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "apldf/error.hpp"
#include "apldf/route_map.hpp"
#include "apldf/units.hpp"

namespace apldf {

SpeedProfile::SpeedProfile(double start_m, double step_m, std::vector<double> values_mps)
    : start_(start_m), step_(step_m), values_(std::move(values_mps)) {
  if (!(step_ > 0.0)) throw ValidationError("profile step must be positive");
  if (values_.size() < 2) throw ValidationError("profile needs at least two grid points");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0) || !std::isfinite(values_[i])) {
      throw ValidationError("profile value at index " + std::to_string(i) +
                            " is negative or not finite");
    }
  }
}

SpeedProfile SpeedProfile::constant_on(const RouteMap& map, double step_m, double value_mps) {
  return SpeedProfile(0.0, step_m,
                      std::vector<double>(grid_points(map.length(), step_m), value_mps));
}

double SpeedProfile::at(double d) const {
  const double x = (d - start_) / step_;
  if (x <= 0.0) return values_.front();
  const auto last = static_cast<double>(values_.size() - 1);
  if (x >= last) return values_.back();
  const auto i = static_cast<std::size_t>(x);
  const double t = x - static_cast<double>(i);
  if (t == 0.0) return values_[i];
  return (1.0 - t) * values_[i] + t * values_[i + 1];
}

bool SpeedProfile::same_grid(const SpeedProfile& other) const {
  return start_ == other.start_ && step_ == other.step_ && values_.size() == other.values_.size();
}

std::size_t grid_points(double length_m, double step_m) {
  return static_cast<std::size_t>(std::floor(length_m / step_m + 1e-9)) + 1;
}

std::string profile_to_csv(const SpeedProfile& profile) {
  std::string out = "d_m,v_mps,v_kmh\n";
  char line[96];
  for (std::size_t i = 0; i < profile.size(); ++i) {
    std::snprintf(line, sizeof line, "%.6f,%.17g,%.17g\n", profile.distance_at(i), profile[i],
                  mps_to_kmh(profile[i]));
    out += line;
  }
  return out;
}

SpeedProfile profile_from_csv(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("d_m,v_mps", 0) != 0) {
    throw ParseError("profile CSV: missing d_m,v_mps,v_kmh header");
  }
  std::vector<double> d, v;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    double dm = 0, vm = 0, vk = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &dm, &vm, &vk) != 3) {
      throw ParseError("profile CSV: malformed row " + std::to_string(row));
    }
    d.push_back(dm);
    v.push_back(vm);
  }
  if (d.size() < 2) throw ParseError("profile CSV: fewer than two rows");
  const double step = d[1] - d[0];
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (std::abs(d[i] - d[0] - static_cast<double>(i) * step) > 1e-6) {
      throw ParseError("profile CSV: non-uniform grid at row " + std::to_string(i + 2));
    }
  }
  return SpeedProfile(d[0], step, std::move(v));
}

}  // namespace apldf
