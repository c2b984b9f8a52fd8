#include "buslink/geo.hpp"

#include <algorithm>
#include <cmath>

namespace buslink {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

double haversine_m(GeoPoint a, GeoPoint b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlam = (b.lng - a.lng) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlam / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double turn_deviation_rad(GeoPoint from, GeoPoint pivot, GeoPoint to) {
  // Local equirectangular projection around the pivot; adequate at stop
  // spacing scales (well under a few km).
  const double c = std::cos(pivot.lat * kDegToRad);
  const double ux = (pivot.lng - from.lng) * c;
  const double uy = pivot.lat - from.lat;
  const double vx = (to.lng - pivot.lng) * c;
  const double vy = to.lat - pivot.lat;
  const double nu = std::hypot(ux, uy);
  const double nv = std::hypot(vx, vy);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  const double cross = ux * vy - uy * vx;
  const double dot = ux * vx + uy * vy;
  return std::atan2(std::abs(cross), dot);
}

}  // namespace buslink
