#include "apldf/planner.hpp"

#include <algorithm>
#include <cmath>

#include "apldf/error.hpp"
#include "apldf/units.hpp"

namespace apldf {

void PlannerParams::validate() const {
  if (!(accel_max > 0.0) || !(decel_max > 0.0) || !(lateral_accel_max > 0.0) ||
      !(grid_step > 0.0)) {
    throw ValidationError("planner parameters must be strictly positive");
  }
  if (grid_step > 5.0) throw ValidationError("planner grid_step must be <= 5 m");
}

// -- SetSpeedOffsetMap --------------------------------------------------------

void SetSpeedOffsetMap::insert_sorted(const SetSpeedOffset& entry) {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), entry,
      [](const SetSpeedOffset& a, const SetSpeedOffset& b) { return a.start_m < b.start_m; });
  entries_.insert(it, entry);
}

void SetSpeedOffsetMap::coalesce() {
  std::vector<SetSpeedOffset> out;
  for (const auto& e : entries_) {
    if (!(e.end_m > e.start_m)) continue;
    if (!out.empty() && out.back().end_m == e.start_m && out.back().offset_mps == e.offset_mps &&
        out.back().whole_segment == e.whole_segment) {
      out.back().end_m = e.end_m;
    } else {
      out.push_back(e);
    }
  }
  entries_ = std::move(out);
}

void SetSpeedOffsetMap::overwrite(const SetSpeedOffset& entry) {
  if (!(entry.end_m > entry.start_m)) return;
  std::vector<SetSpeedOffset> kept;
  for (const auto& e : entries_) {
    if (e.end_m <= entry.start_m || e.start_m >= entry.end_m) {
      kept.push_back(e);
      continue;
    }
    if (e.start_m < entry.start_m) kept.push_back({e.start_m, entry.start_m, e.offset_mps, false});
    if (e.end_m > entry.end_m) kept.push_back({entry.end_m, e.end_m, e.offset_mps, false});
  }
  entries_ = std::move(kept);
  insert_sorted(entry);
  coalesce();
}

void SetSpeedOffsetMap::accumulate(const SetSpeedOffset& entry) {
  if (!(entry.end_m > entry.start_m)) return;
  // Split every existing entry and the new one at all boundaries, then sum.
  std::vector<double> cuts{entry.start_m, entry.end_m};
  for (const auto& e : entries_) {
    cuts.push_back(e.start_m);
    cuts.push_back(e.end_m);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<SetSpeedOffset> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    bool covered = false, whole = false;
    for (const auto& e : entries_) {
      if (mid >= e.start_m && mid < e.end_m) {
        sum += e.offset_mps;
        covered = true;
        whole = whole || e.whole_segment;
      }
    }
    if (mid >= entry.start_m && mid < entry.end_m) {
      sum += entry.offset_mps;
      covered = true;
      whole = whole || entry.whole_segment;
    }
    if (covered && sum != 0.0) out.push_back({a, b, sum, whole});
  }
  entries_ = std::move(out);
  coalesce();
}

double SetSpeedOffsetMap::offset_at(double d) const {
  for (const auto& e : entries_) {
    if (d >= e.start_m && d < e.end_m) return e.offset_mps;
  }
  return 0.0;
}

// -- Planning ----------------------------------------------------------------

double curve_speed_limit(double kappa, const PlannerParams& params) {
  if (!(kappa > 0.0)) return kMaxSpeedMps;
  return std::min(kMaxSpeedMps, std::sqrt(params.lateral_accel_max / kappa));
}

double offset_target(double profile_mps, double offset_mps, double curve_cap_mps) {
  const double shifted = profile_mps + offset_mps;
  return std::max(0.0, std::min(shifted, std::max(profile_mps, curve_cap_mps)));
}

std::vector<double> pointwise_targets(const RouteMap& map, const PlannerParams& params) {
  const std::size_t n = grid_points(map.length(), params.grid_step);
  std::vector<double> v(n);
  const std::size_t last_zone = map.zones().size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) * params.grid_step;
    const double legal =
        d < map.length() ? map.legal_speed(d) : map.zones()[last_zone].limit_mps;
    v[i] = std::min({legal, curve_speed_limit(map.curvature_at(d), params), kMaxSpeedMps});
  }
  return v;
}

void enforce_kinematics(std::span<double> v, double step, double accel_max, double decel_max) {
  if (v.size() < 2) return;
  const double dec = 2.0 * decel_max * step;
  for (std::size_t i = v.size() - 1; i-- > 0;) {
    v[i] = std::min(v[i], std::sqrt(v[i + 1] * v[i + 1] + dec));
  }
  const double acc = 2.0 * accel_max * step;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    v[i + 1] = std::min(v[i + 1], std::sqrt(v[i] * v[i] + acc));
  }
}

SpeedProfile plan_base_profile(const RouteMap& map, const PlannerParams& params) {
  params.validate();
  auto v = pointwise_targets(map, params);
  enforce_kinematics(v, params.grid_step, params.accel_max, params.decel_max);
  return SpeedProfile(0.0, params.grid_step, std::move(v));
}

SpeedProfile apply_set_speed_offsets(const SpeedProfile& profile, const RouteMap& map,
                                     const SetSpeedOffsetMap& offsets,
                                     const PlannerParams& params) {
  if (offsets.empty()) return profile;
  const auto src = profile.values();
  const std::size_t n = src.size();
  std::vector<double> v(src.begin(), src.end());
  std::vector<char> seed(n, 0);
  for (const auto& e : offsets.entries()) {
    if (e.start_m < 0.0 || e.end_m > map.length() + 1e-9 || !(e.end_m > e.start_m)) {
      throw RangeError("set-speed offset span outside route");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double d = profile.distance_at(i);
      if (d < e.start_m || d >= e.end_m) continue;
      const double cap = curve_speed_limit(map.curvature_at(std::min(d, map.length())), params);
      v[i] = offset_target(src[i], e.offset_mps, cap);
      seed[i] = 1;
    }
  }
  // Kinematic passes restricted to chains that start inside a span, so a
  // learned profile elsewhere is never re-shaped.
  const double step = profile.step();
  const double dec = 2.0 * params.decel_max * step;
  std::vector<char> touched = seed;
  for (std::size_t i = n - 1; i-- > 0;) {
    const double cand = std::sqrt(v[i + 1] * v[i + 1] + dec);
    if (cand < v[i] && (seed[i] || touched[i + 1])) {
      v[i] = cand;
      touched[i] = 1;
    }
  }
  const double acc = 2.0 * params.accel_max * step;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double cand = std::sqrt(v[i] * v[i] + acc);
    if (cand < v[i + 1] && (seed[i + 1] || touched[i])) {
      v[i + 1] = cand;
      touched[i + 1] = 1;
    }
  }
  return SpeedProfile(profile.start(), step, std::move(v));
}

}  // namespace apldf
