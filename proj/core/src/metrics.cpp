#include "apldf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "apldf/error.hpp"

namespace apldf {
namespace {

using Interval = std::pair<double, double>;

double union_length(std::vector<Interval> spans) {
  std::sort(spans.begin(), spans.end());
  double total = 0.0;
  double cur_lo = 0.0, cur_hi = 0.0;
  bool open = false;
  for (const auto& [lo, hi] : spans) {
    if (!(hi > lo)) continue;
    if (open && lo <= cur_hi) {
      cur_hi = std::max(cur_hi, hi);
      continue;
    }
    if (open) total += cur_hi - cur_lo;
    cur_lo = lo;
    cur_hi = hi;
    open = true;
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

}  // namespace

InterventionRates intervention_rates(const DriveLog& log) {
  if (!log.complete) throw ValidationError("intervention rates need a complete drive log");
  InterventionRates r;
  r.lap_time = log.lap_time;
  if (!(log.lap_time > 0.0)) return r;
  std::vector<Interval> pedal, set, all;
  for (const auto& rec : log.interventions) {
    const Interval span{rec.t_start, rec.t_end};
    (rec.is_pedal() ? pedal : set).push_back(span);
    all.push_back(span);
  }
  r.pedal_ir = std::min(1.0, union_length(pedal) / log.lap_time);
  r.set_speed_ir = std::min(1.0, union_length(set) / log.lap_time);
  r.combined_ir = std::min(1.0, union_length(all) / log.lap_time);
  return r;
}

std::vector<InterventionRates> ir_evolution(std::span<const DriveLog> history) {
  std::vector<InterventionRates> out;
  out.reserve(history.size());
  for (const auto& log : history) out.push_back(intervention_rates(log));
  return out;
}

InterventionRates mean_rates(std::span<const InterventionRates> rates) {
  InterventionRates m;
  if (rates.empty()) return m;
  for (const auto& r : rates) {
    m.pedal_ir += r.pedal_ir;
    m.set_speed_ir += r.set_speed_ir;
    m.combined_ir += r.combined_ir;
    m.lap_time += r.lap_time;
  }
  const auto n = static_cast<double>(rates.size());
  m.pedal_ir /= n;
  m.set_speed_ir /= n;
  m.combined_ir /= n;
  m.lap_time /= n;
  return m;
}

double profile_rmse(const SpeedProfile& a, const SpeedProfile& b) {
  if (!a.same_grid(b)) throw ValidationError("profile_rmse: grid mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] - b[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(a.size()));
}

std::string rates_to_csv(std::span<const RateRow> rows) {
  std::string out = "driver_id,lap,pedal_ir,set_speed_ir,combined_ir,lap_time_s\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f,%.6f,%.3f\n", row.lap, row.rates.pedal_ir,
                  row.rates.set_speed_ir, row.rates.combined_ir, row.rates.lap_time);
    out += row.driver_id;
    out += buf;
  }
  return out;
}

}  // namespace apldf
