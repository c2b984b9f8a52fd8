#pragma once

namespace buslink {

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lng = 0.0;  // degrees
};

inline constexpr double kEarthRadiusM = 6'371'000.0;

/// Great-circle (haversine) distance in meters.
double haversine_m(GeoPoint a, GeoPoint b);

/// Deviation from straight continuation when travelling from -> pivot -> to.
/// 0 means perfectly straight, pi means an immediate reversal. Degenerate
/// segments (coincident points) contribute no turn and yield 0.
double turn_deviation_rad(GeoPoint from, GeoPoint pivot, GeoPoint to);

}  // namespace buslink
