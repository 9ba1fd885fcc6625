#include "apldf/spaa.hpp"

#include <algorithm>
#include <cmath>

#include "apldf/error.hpp"
#include "apldf/savitzky_golay.hpp"

namespace apldf {

std::size_t StretchParams::sg_window_points(double grid_step) const {
  auto pts = static_cast<std::size_t>(std::lround(sg_window_m / grid_step));
  if (pts % 2 == 0) ++pts;
  return pts;
}

void StretchParams::validate(double grid_step) const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in [0, 1)");
  if (!(cap_seconds > 0.0)) throw ValidationError("cap_seconds must be positive");
  if (!(kappa_low < kappa_high) || kappa_low < 0.0) {
    throw ValidationError("curvature attenuation band must satisfy 0 <= kappa_low < kappa_high");
  }
  if (!(deviation_eps >= 0.0) || !(merge_gap_m >= 0.0) || !(recovery_tol >= 0.0)) {
    throw ValidationError("deviation thresholds must be non-negative");
  }
  if (sg_order != 2) throw ValidationError("smoothing order must be 2");
  if (sg_window_points(grid_step) < 5) {
    throw ValidationError("smoothing window must cover at least 5 grid points");
  }
  if (!(set_speed_window_s >= 0.0)) throw ValidationError("set_speed_window_s must be >= 0");
}

double effective_alpha(const InterventionRecord& rec, double v0, const RouteMap& map,
                       const StretchParams& p) {
  if (rec.samples.size() < 2) return 0.0;
  const double d0 = rec.samples.front().d_m;
  const double dn = rec.samples.back().d_m;
  const double span = dn - d0;
  if (!(span > 0.0)) return 0.0;
  const double capped = std::min(p.alpha, p.cap_seconds * std::max(v0, 0.0) / span);
  const double kappa_max = map.max_curvature(d0 - p.alpha * span, dn);
  const double atten =
      std::clamp((p.kappa_high - kappa_max) / (p.kappa_high - p.kappa_low), 0.0, 1.0);
  return capped * atten;
}

std::vector<VelocitySample> stretch_intervention(std::span<const VelocitySample> samples,
                                                 double alpha_eff) {
  std::vector<VelocitySample> out(samples.begin(), samples.end());
  if (out.empty()) return out;
  const double dn = samples.back().d_m;
  for (auto& s : out) s.d_m = s.d_m - alpha_eff * (dn - s.d_m);
  return out;
}

std::vector<VelocitySample> align_offset(std::span<const VelocitySample> stretched,
                                         const SpeedProfile& v_driver) {
  std::vector<VelocitySample> out(stretched.begin(), stretched.end());
  if (out.size() < 2) return out;
  const double d0 = stretched.front().d_m;
  const double dn = stretched.back().d_m;
  if (!(dn > d0)) return out;
  const double dv = v_driver.at(d0) - stretched.front().v_mps;
  for (auto& s : out) s.v_mps = s.v_mps + dv * (1.0 - (s.d_m - d0) / (dn - d0));
  return out;
}

double interpolate_samples(std::span<const VelocitySample> samples, double d) {
  if (samples.empty()) throw ValidationError("interpolate_samples: empty sample list");
  if (d <= samples.front().d_m) return samples.front().v_mps;
  if (d >= samples.back().d_m) return samples.back().v_mps;
  auto it = std::lower_bound(samples.begin(), samples.end(), d,
                             [](const VelocitySample& s, double x) { return s.d_m < x; });
  if (it->d_m == d) return it->v_mps;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (d - lo.d_m) / (hi.d_m - lo.d_m);
  return (1.0 - t) * lo.v_mps + t * hi.v_mps;
}

SpeedProfile build_prepro_profile(const DriveLog& log, const SpeedProfile& baseline,
                                  const RouteMap& map, const StretchParams& p) {
  const SpeedProfile trace = driver_trace(log, baseline);
  const std::size_t n = baseline.size();
  std::vector<double> out(baseline.values().begin(), baseline.values().end());

  std::vector<const InterventionRecord*> pedal;
  for (const auto& rec : log.interventions) {
    if (rec.is_pedal()) pedal.push_back(&rec);
  }
  std::stable_sort(pedal.begin(), pedal.end(), [](const auto* a, const auto* b) {
    return a->t_start < b->t_start;
  });

  for (const auto* rec : pedal) {
    if (rec->samples.size() < 2) continue;
    if (!(rec->samples.back().d_m > rec->samples.front().d_m)) continue;
    const double alpha = effective_alpha(*rec, rec->samples.front().v_mps, map, p);
    const auto aligned = align_offset(stretch_intervention(rec->samples, alpha), trace);
    const double lo = aligned.front().d_m;
    const double hi = aligned.back().d_m;

    const double first = std::ceil((lo - baseline.start()) / baseline.step()) - 1.0;
    std::size_t i = first > 0.0 ? static_cast<std::size_t>(first) : 0;
    for (; i < n; ++i) {
      const double d = baseline.distance_at(i);
      if (d > hi) break;
      if (d >= lo) out[i] = std::max(0.0, interpolate_samples(aligned, d));
    }
    // Recorded recovery until the vehicle is back on the reference.
    for (; i < n && std::abs(trace[i] - baseline[i]) > p.recovery_tol; ++i) out[i] = trace[i];
  }
  return SpeedProfile(baseline.start(), baseline.step(), std::move(out));
}

std::vector<GridSegment> deviation_segments(const SpeedProfile& baseline,
                                            const SpeedProfile& prepro, const StretchParams& p) {
  if (!baseline.same_grid(prepro)) throw ValidationError("deviation_segments: grid mismatch");
  std::vector<GridSegment> runs;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    if (!(std::abs(prepro[i] - baseline[i]) > p.deviation_eps)) continue;
    if (!runs.empty() && runs.back().last + 1 == i) {
      runs.back().last = i;
    } else {
      runs.push_back({i, i});
    }
  }
  std::vector<GridSegment> merged;
  for (const auto& r : runs) {
    if (!merged.empty() &&
        static_cast<double>(r.first - merged.back().last) * baseline.step() < p.merge_gap_m) {
      merged.back().last = r.last;
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

SpeedProfile segment_mean(const SpeedProfile& baseline, const SpeedProfile& prepro,
                          std::span<const GridSegment> segments) {
  if (!baseline.same_grid(prepro)) throw ValidationError("segment_mean: grid mismatch");
  std::vector<double> mean(baseline.values().begin(), baseline.values().end());
  for (const auto& s : segments) {
    if (s.last >= mean.size() || s.first > s.last) throw RangeError("segment_mean: bad segment");
    for (std::size_t i = s.first; i <= s.last; ++i) mean[i] = 0.5 * (baseline[i] + prepro[i]);
  }
  return SpeedProfile(baseline.start(), baseline.step(), std::move(mean));
}

SpeedProfile blend(const SpeedProfile& baseline, const SpeedProfile& prepro,
                   const StretchParams& p) {
  if (!baseline.same_grid(prepro)) throw ValidationError("blend: grid mismatch");
  const auto segments = deviation_segments(baseline, prepro, p);
  std::vector<double> out(baseline.values().begin(), baseline.values().end());
  if (segments.empty()) return baseline;

  const auto averaged = segment_mean(baseline, prepro, segments);
  const std::vector<double> mean(averaged.values().begin(), averaged.values().end());
  const std::size_t window = p.sg_window_points(baseline.step());
  const SavitzkyGolay sg(window, p.sg_order);
  const std::size_t n = out.size();
  for (const auto& s : segments) {
    const std::size_t lo = s.first > window ? s.first - window : 0;
    const std::size_t hi = std::min(n - 1, s.last + window);
    const auto filtered =
        sg.apply(std::span<const double>(mean).subspan(lo, hi - lo + 1));
    for (std::size_t i = s.first; i <= s.last; ++i) out[i] = std::max(0.0, filtered[i - lo]);
  }
  return SpeedProfile(baseline.start(), baseline.step(), std::move(out));
}

SetSpeedOffsetMap adopt_set_speed(const DriveLog& log, const RouteMap& map,
                                  const SetSpeedOffsetMap& current, const StretchParams& p) {
  std::vector<const InterventionRecord*> records;
  for (const auto& rec : log.interventions) {
    if (rec.kind == InterventionKind::set_speed && rec.offset_mps != 0.0) records.push_back(&rec);
  }
  std::stable_sort(records.begin(), records.end(), [](const auto* a, const auto* b) {
    return a->t_start < b->t_start;
  });

  SetSpeedOffsetMap lap;
  for (const auto* rec : records) {
    const std::size_t zone = map.zone_index(std::clamp(rec->d_start, 0.0, map.length()));
    const double zone_start = map.zone_start(zone);
    const double zone_end = map.zone_end(zone);
    double entered_at = 0.0;
    for (const auto& s : log.states) {
      if (s.d >= zone_start) {
        entered_at = s.t;
        break;
      }
    }
    SetSpeedOffset entry;
    entry.offset_mps = rec->offset_mps;
    if (rec->t_start - entered_at <= p.set_speed_window_s) {
      entry.start_m = zone_start;
      entry.end_m = zone_end;
      entry.whole_segment = true;
    } else {
      entry.start_m = rec->d_start;
      entry.end_m = std::min(rec->d_end, zone_end);
    }
    lap.overwrite(entry);
  }

  SetSpeedOffsetMap out = current;
  for (const auto& e : lap.entries()) out.accumulate(e);
  return out;
}

IterationState IterationState::start(SpeedProfile baseline) {
  IterationState s{0, baseline, {}, {}};
  s.history.push_back({0, std::move(baseline), std::nullopt, 0});
  return s;
}

IterationState apply_iteration(const IterationState& state, const DriveLog& log,
                               const RouteMap& map, const SpaaConfig& config) {
  if (!log.complete) throw ValidationError("apply_iteration: drive log is incomplete");
  if (log.route_name != map.name()) {
    throw ValidationError("apply_iteration: log recorded on route '" + log.route_name +
                          "', expected '" + map.name() + "'");
  }
  const auto& base = state.baseline;
  if (base.start() != 0.0 || base.size() != grid_points(map.length(), base.step())) {
    throw ValidationError("apply_iteration: baseline grid does not match the route");
  }
  config.stretch.validate(base.step());

  const SetSpeedOffsetMap lap = adopt_set_speed(log, map, {}, config.stretch);
  const SpeedProfile reference = apply_set_speed_offsets(base, map, lap, config.planner);
  const SpeedProfile prepro = build_prepro_profile(log, reference, map, config.stretch);
  SpeedProfile next = blend(reference, prepro, config.stretch);

  if (config.stretch.max_over_limit) {
    std::vector<double> v(next.values().begin(), next.values().end());
    const std::size_t last_zone = map.zones().size() - 1;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = next.distance_at(i);
      const double legal = d < map.length() ? map.legal_speed(d) : map.zones()[last_zone].limit_mps;
      v[i] = std::min(v[i], legal + *config.stretch.max_over_limit);
    }
    next = SpeedProfile(next.start(), next.step(), std::move(v));
  }

  IterationState out = state;
  out.iteration = state.iteration + 1;
  out.baseline = next;
  out.offsets = state.offsets;
  for (const auto& e : lap.entries()) out.offsets.accumulate(e);
  out.history.push_back({out.iteration, std::move(next), intervention_rates(log),
                         log.interventions.size()});
  return out;
}

}  // namespace apldf
