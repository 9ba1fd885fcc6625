#include "apldf/route_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "apldf/error.hpp"
#include "apldf/units.hpp"

namespace apldf {
namespace {

// km/h value that converts back to exactly the stored m/s value, so that
// serialize -> load is lossless whenever such a value exists.
double exact_kmh(double mps) {
  const double guess = mps_to_kmh(mps);
  double lo = guess, hi = guess;
  for (int i = 0; i < 8; ++i) {
    if (kmh_to_mps(lo) == mps) return lo;
    if (kmh_to_mps(hi) == mps) return hi;
    lo = std::nextafter(lo, 0.0);
    hi = std::nextafter(hi, 1e9);
  }
  return guess;
}

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

RouteMap::RouteMap(std::string name, double length_m, std::vector<SpeedLimitZone> zones,
                   std::vector<CurvatureSample> curvature)
    : name_(std::move(name)),
      length_(length_m),
      zones_(std::move(zones)),
      curvature_(std::move(curvature)) {
  if (!(length_ > 0.0) || !std::isfinite(length_)) {
    throw ValidationError("route length must be positive, got " + fmt_num(length_));
  }
  if (zones_.empty()) throw ValidationError("route has no limit zones");
  if (zones_.front().start_m != 0.0) {
    throw ValidationError("limit_zones[0]: first zone must start at 0, got " +
                          fmt_num(zones_.front().start_m));
  }
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    const auto& z = zones_[i];
    const std::string where = "limit_zones[" + std::to_string(i) + "]";
    if (!(z.limit_mps > 0.0) || z.limit_mps > kMaxSpeedMps) {
      throw ValidationError(where + ": limit out of range (0, 252] km/h");
    }
    if (i > 0 && !(z.start_m > zones_[i - 1].start_m)) {
      throw ValidationError(where + ": non-monotone zone start " + fmt_num(z.start_m));
    }
    if (!(z.start_m < length_)) {
      throw ValidationError(where + ": zone start " + fmt_num(z.start_m) +
                            " not inside route of length " + fmt_num(length_));
    }
  }
  if (curvature_.empty()) curvature_.push_back({0.0, 0.0});
  if (curvature_.front().d_m != 0.0) {
    throw ValidationError("curvature[0]: first sample must be at 0");
  }
  for (std::size_t i = 0; i < curvature_.size(); ++i) {
    const auto& c = curvature_[i];
    const std::string where = "curvature[" + std::to_string(i) + "]";
    if (!(c.kappa >= 0.0) || !std::isfinite(c.kappa)) {
      throw ValidationError(where + ": curvature must be >= 0");
    }
    if (i > 0 && !(c.d_m > curvature_[i - 1].d_m)) {
      throw ValidationError(where + ": non-monotone curvature distance " + fmt_num(c.d_m));
    }
    if (c.d_m > length_) {
      throw ValidationError(where + ": distance " + fmt_num(c.d_m) + " beyond route end");
    }
  }
}

std::size_t RouteMap::zone_index(double d) const {
  if (!(d >= 0.0) || d > length_) {
    throw RangeError("distance " + fmt_num(d) + " outside route [0, " + fmt_num(length_) + "]");
  }
  auto it = std::upper_bound(zones_.begin(), zones_.end(), d,
                             [](double x, const SpeedLimitZone& z) { return x < z.start_m; });
  return static_cast<std::size_t>(std::distance(zones_.begin(), it)) - 1;
}

double RouteMap::legal_speed(double d) const {
  if (!(d >= 0.0) || !(d < length_)) {
    throw RangeError("distance " + fmt_num(d) + " outside route [0, " + fmt_num(length_) + ")");
  }
  return zones_[zone_index(d)].limit_mps;
}

double RouteMap::zone_end(std::size_t index) const {
  if (index >= zones_.size()) throw RangeError("zone index out of range");
  return index + 1 < zones_.size() ? zones_[index + 1].start_m : length_;
}

double RouteMap::curvature_at(double d) const {
  if (!(d >= 0.0) || d > length_) {
    throw RangeError("distance " + fmt_num(d) + " outside route [0, " + fmt_num(length_) + "]");
  }
  auto it = std::upper_bound(curvature_.begin(), curvature_.end(), d,
                             [](double x, const CurvatureSample& c) { return x < c.d_m; });
  if (it == curvature_.end()) return curvature_.back().kappa;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (d - lo.d_m) / (hi.d_m - lo.d_m);
  return (1.0 - t) * lo.kappa + t * hi.kappa;
}

double RouteMap::max_curvature(double from, double to) const {
  from = std::clamp(from, 0.0, length_);
  to = std::clamp(to, 0.0, length_);
  if (to < from) std::swap(from, to);
  double best = std::max(curvature_at(from), curvature_at(to));
  for (const auto& c : curvature_) {
    if (c.d_m > from && c.d_m < to) best = std::max(best, c.kappa);
  }
  return best;
}

RouteMap load_route(std::string_view source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("route file: ") + e.what());
  }
  try {
    std::vector<SpeedLimitZone> zones;
    const auto& jz = doc.at("limit_zones");
    if (!jz.is_array()) throw ParseError("route file: limit_zones must be an array");
    for (std::size_t i = 0; i < jz.size(); ++i) {
      zones.push_back({jz[i].at("start_m").get<double>(),
                       kmh_to_mps(jz[i].at("limit_kmh").get<double>())});
    }
    std::vector<CurvatureSample> curv;
    if (doc.contains("curvature")) {
      const auto& jc = doc.at("curvature");
      if (!jc.is_array()) throw ParseError("route file: curvature must be an array");
      for (const auto& c : jc) {
        curv.push_back({c.at("d_m").get<double>(), c.at("kappa_inv_m").get<double>()});
      }
    }
    return RouteMap(doc.at("name").get<std::string>(), doc.at("length_m").get<double>(),
                    std::move(zones), std::move(curv));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("route file: ") + e.what());
  }
}

RouteMap load_route_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open route file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_route(buf.str());
}

std::string serialize_route(const RouteMap& map) {
  nlohmann::json doc;
  doc["name"] = map.name();
  doc["length_m"] = map.length();
  auto& zones = doc["limit_zones"] = nlohmann::json::array();
  for (const auto& z : map.zones()) {
    zones.push_back({{"start_m", z.start_m}, {"limit_kmh", exact_kmh(z.limit_mps)}});
  }
  auto& curv = doc["curvature"] = nlohmann::json::array();
  for (const auto& c : map.curvature()) {
    curv.push_back({{"d_m", c.d_m}, {"kappa_inv_m", c.kappa}});
  }
  return doc.dump(2);
}

}  // namespace apldf
