#pragma once

namespace apldf {

inline constexpr double kKmhPerMps = 3.6;

// Upper cap used wherever a constraint is absent (straight road, no limit).
inline constexpr double kMaxSpeedMps = 70.0;

constexpr double kmh_to_mps(double kmh) { return kmh / kKmhPerMps; }
constexpr double mps_to_kmh(double mps) { return mps * kKmhPerMps; }

}  // namespace apldf
