#include "apldf/driver_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "apldf/units.hpp"

namespace apldf {
namespace {

constexpr double kLeverStepMps = kmh_to_mps(5.0);
constexpr double kPedalFloor = 0.15;
constexpr double kMinZoneGap = 10.0;

// Portable uniform draw in [0, 1); std distributions differ across libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

// Distinct indices in [0, n), in draw order.
std::vector<std::size_t> choose(std::mt19937_64& rng, std::size_t n, int count) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<std::size_t> out;
  for (int k = 0; k < count && !pool.empty(); ++k) {
    const std::size_t j = pick(rng, pool.size());
    out.push_back(pool[j]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
  }
  return out;
}

struct Constraints {
  std::vector<double> zone_starts;
  std::vector<double> zone_speed;  // limit + straight offset
  std::vector<double> curve_delta; // per grid point, added to the curve cap
};

std::vector<double> plan_from(const RouteMap& map, const PlannerParams& planner,
                              const Constraints& c, double accel, double decel) {
  const std::size_t n = grid_points(map.length(), planner.grid_step);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) * planner.grid_step;
    auto it = std::upper_bound(c.zone_starts.begin(), c.zone_starts.end(), d);
    const auto zone = static_cast<std::size_t>(std::distance(c.zone_starts.begin(), it)) - 1;
    const double cap =
        std::max(3.0, curve_speed_limit(map.curvature_at(d), planner) + c.curve_delta[i]);
    v[i] = std::max(0.0, std::min({c.zone_speed[zone], cap, kMaxSpeedMps}));
  }
  enforce_kinematics(v, planner.grid_step, accel, decel);
  return v;
}

}  // namespace

bool PerturbationSpec::is_identity() const {
  return curves == 0 && transitions == 0 && straights == 0 && all_straights_kmh == 0.0 &&
         accel_scale == 1.0 && decel_scale == 1.0;
}

PreferenceProfile make_preference(const RouteMap& map, const SpeedProfile& baseline,
                                  const PerturbationSpec& spec, std::uint64_t seed,
                                  const PlannerParams& planner, const DriverParams& params) {
  if (spec.is_identity()) return {baseline, params};

  const std::size_t n = grid_points(map.length(), planner.grid_step);
  Constraints nominal;
  for (const auto& z : map.zones()) {
    nominal.zone_starts.push_back(z.start_m);
    nominal.zone_speed.push_back(z.limit_mps);
  }
  nominal.curve_delta.assign(n, 0.0);
  Constraints pert = nominal;

  std::mt19937_64 rng(seed);
  const std::size_t zones = map.zones().size();

  for (auto& s : pert.zone_speed) s += kmh_to_mps(spec.all_straights_kmh);
  static constexpr double kStraightChoices[] = {-10.0, -5.0, 5.0, 10.0};
  for (std::size_t z : choose(rng, zones, spec.straights)) {
    pert.zone_speed[z] += kmh_to_mps(kStraightChoices[pick(rng, 4)]);
  }
  for (auto& s : pert.zone_speed) s = std::max(s, kmh_to_mps(10.0));

  if (zones > 1) {
    for (std::size_t b : choose(rng, zones - 1, spec.transitions)) {
      const std::size_t z = b + 1;
      const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
      const double shift = sign * uniform(rng, spec.shift_m_min, spec.shift_m_max);
      const double lo = pert.zone_starts[z - 1] + kMinZoneGap;
      const double hi = (z + 1 < zones ? pert.zone_starts[z + 1] : map.length()) - kMinZoneGap;
      if (lo < hi) pert.zone_starts[z] = std::clamp(pert.zone_starts[z] + shift, lo, hi);
    }
  }

  // Curves: maximal grid runs where the curve speed undercuts the legal limit.
  std::vector<std::pair<std::size_t, std::size_t>> curves;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::min(static_cast<double>(i) * planner.grid_step, map.length());
    const double legal = map.zones()[map.zone_index(d)].limit_mps;
    const bool in_curve = curve_speed_limit(map.curvature_at(d), planner) < legal;
    if (!in_curve) continue;
    if (!curves.empty() && curves.back().second + 1 == i) {
      curves.back().second = i;
    } else {
      curves.emplace_back(i, i);
    }
  }
  for (std::size_t c : choose(rng, curves.size(), spec.curves)) {
    const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    const double delta =
        sign * kmh_to_mps(uniform(rng, spec.curve_delta_kmh_min, spec.curve_delta_kmh_max));
    for (std::size_t i = curves[c].first; i <= curves[c].second; ++i) pert.curve_delta[i] = delta;
  }

  const auto nom = plan_from(map, planner, nominal, planner.accel_max, planner.decel_max);
  const auto per = plan_from(map, planner, pert, planner.accel_max * spec.accel_scale,
                             planner.decel_max * spec.decel_scale);
  std::vector<double> v(baseline.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double diff = i < nom.size() ? per[i] - nom[i] : 0.0;
    v[i] = std::max(0.0, baseline[i] + diff);
  }
  return {SpeedProfile(baseline.start(), baseline.step(), std::move(v)), params};
}

// -- SyntheticDriver -----------------------------------------------------------

SyntheticDriver::SyntheticDriver(const RouteMap& map, PreferenceProfile pref,
                                 const SimParams& sim, std::uint64_t noise_seed)
    : map_(&map), pref_(std::move(pref)), sim_(sim), noise_seed_(noise_seed) {}

void SyntheticDriver::reset() {
  mode_ = Mode::idle;
  error_since_.reset();
  crossed_at_.reset();
  released_at_ = 0.0;
  noise_amp_ = 0.0;
  noise_phase_ = 0.0;
  if (pref_.params.noise_mps > 0.0) {
    std::mt19937_64 rng(noise_seed_ ^ (0x9E3779B97F4A7C15ULL * (lap_ + 1)));
    noise_amp_ = pref_.params.noise_mps * uniform(rng, 0.5, 1.0);
    noise_phase_ = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  }
  ++lap_;
}

double SyntheticDriver::preferred(double d) const {
  double v = pref_.v_pref.at(d);
  if (noise_amp_ > 0.0) v += noise_amp_ * std::sin(d / 300.0 + noise_phase_);
  return std::max(0.0, v);
}

bool SyntheticDriver::lever_region(const SimState& s) const {
  if (!pref_.params.set_speed_user || !s.pldf_active) return false;
  const double ahead = std::min(map_->length(), s.d + std::max(s.v, 5.0) * 4.0);
  if (map_->zone_index(ahead) != s.zone) return false;
  PlannerParams lat;
  lat.lateral_accel_max = sim_.lateral_accel_max;
  const double margin = kmh_to_mps(15.0);
  if (curve_speed_limit(map_->max_curvature(s.d, ahead), lat) < s.active_limit + margin) {
    return false;
  }
  return std::abs(preferred(ahead) - preferred(s.d)) < 0.3;
}

DriverInputs SyntheticDriver::next(const SimState& s) {
  const auto& p = pref_.params;
  DriverInputs in;
  const double err = preferred(s.d) - s.v;

  switch (mode_) {
    case Mode::idle: {
      if (!s.pldf_active) {
        in.reactivate = true;
        break;
      }
      if (lever_region(s)) {
        const double set_err = preferred(s.d) - s.target_v;
        if (std::abs(set_err) <= p.tol) {
          error_since_.reset();
          break;
        }
        if (!error_since_) error_since_ = s.t;
        if (s.t - *error_since_ >= p.react_delay) {
          int steps = static_cast<int>(std::lround(set_err / kLeverStepMps));
          if (steps == 0) steps = set_err > 0.0 ? 1 : -1;
          in.lever_steps = steps;
          error_since_.reset();
        }
        break;
      }
      if (std::abs(err) <= p.tol) {
        error_since_.reset();
        break;
      }
      if (!error_since_) error_since_ = s.t;
      if (s.t - *error_since_ >= p.react_delay) {
        mode_ = err > 0.0 ? Mode::gas : Mode::brake;
        crossed_at_.reset();
        error_since_.reset();
      } else {
        break;
      }
      [[fallthrough]];
    }
    case Mode::gas:
    case Mode::brake: {
      const bool gas = mode_ == Mode::gas;
      const double e = gas ? err : -err;
      if (e <= 0.0) {
        if (!crossed_at_) crossed_at_ = s.t;
        if (s.t - *crossed_at_ >= p.release_delay) {
          mode_ = gas ? Mode::idle : Mode::await_reactivate;
          released_at_ = s.t;
          crossed_at_.reset();
          break;
        }
      } else {
        crossed_at_.reset();
      }
      const double accel_max = gas ? sim_.gas_accel_max : sim_.brake_decel_max;
      const double pedal = std::clamp(p.overreact_gain * e / accel_max, kPedalFloor, 1.0);
      (gas ? in.gas : in.brake) = pedal;
      break;
    }
    case Mode::await_reactivate:
      if (s.t - released_at_ >= p.react_delay) {
        in.reactivate = true;
        mode_ = Mode::idle;
      }
      break;
  }
  return in;
}

}  // namespace apldf
