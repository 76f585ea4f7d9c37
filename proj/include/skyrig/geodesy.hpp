#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "skyrig/error.hpp"

namespace skyrig {

/// Latitude/longitude in degrees and altitude in meters above the WGS-84
/// ellipsoid.
struct GeodeticCoord {
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;

  bool operator==(const GeodeticCoord&) const = default;
};

/// Vector in the local north-east-down frame. Down is positive toward the
/// earth. Used for positions (meters) and velocities (m/s) alike.
struct Ned {
  double north = 0.0;
  double east = 0.0;
  double down = 0.0;

  bool operator==(const Ned&) const = default;

  Ned& operator+=(const Ned& o) {
    north += o.north;
    east += o.east;
    down += o.down;
    return *this;
  }
  Ned& operator-=(const Ned& o) {
    north -= o.north;
    east -= o.east;
    down -= o.down;
    return *this;
  }
  Ned& operator*=(double s) {
    north *= s;
    east *= s;
    down *= s;
    return *this;
  }

  friend Ned operator+(Ned a, const Ned& b) { return a += b; }
  friend Ned operator-(Ned a, const Ned& b) { return a -= b; }
  friend Ned operator*(Ned a, double s) { return a *= s; }
  friend Ned operator*(double s, Ned a) { return a *= s; }

  double dot(const Ned& o) const { return north * o.north + east * o.east + down * o.down; }
  double norm() const { return std::sqrt(dot(*this)); }
  double horizontal_norm() const { return std::hypot(north, east); }
  bool finite() const {
    return std::isfinite(north) && std::isfinite(east) && std::isfinite(down);
  }
};

using NedPosition = Ned;
using NedVelocity = Ned;

inline double distance(const Ned& a, const Ned& b) { return (a - b).norm(); }

/// Wraps a longitude (or longitude difference) into [-180, 180).
inline double normalize_longitude(double deg) {
  double r = std::fmod(deg + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  return r - 180.0;
}

/// Wraps a heading into [0, 360).
inline double normalize_heading(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

inline bool is_valid(const GeodeticCoord& c) {
  return std::isfinite(c.latitude_deg) && std::isfinite(c.longitude_deg) &&
         std::isfinite(c.altitude_m) && c.latitude_deg >= -90.0 && c.latitude_deg <= 90.0 &&
         c.longitude_deg >= -180.0 && c.longitude_deg < 180.0;
}

namespace wgs84 {
inline constexpr double kSemiMajorAxis = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kEccentricitySq = kFlattening * (2.0 - kFlattening);

// Radius of curvature in the meridian at the given latitude.
inline double meridional_radius(double latitude_deg) {
  const double s = std::sin(latitude_deg * std::numbers::pi / 180.0);
  const double w = 1.0 - kEccentricitySq * s * s;
  return kSemiMajorAxis * (1.0 - kEccentricitySq) / (w * std::sqrt(w));
}

// Radius of curvature in the prime vertical at the given latitude.
inline double prime_vertical_radius(double latitude_deg) {
  const double s = std::sin(latitude_deg * std::numbers::pi / 180.0);
  return kSemiMajorAxis / std::sqrt(1.0 - kEccentricitySq * s * s);
}
}  // namespace wgs84

/// Maximum horizontal offset from the origin accepted by geodetic_to_ned.
inline constexpr double kMaxFrameOffsetM = 50'000.0;

/// Local tangent plane anchored at a geodetic origin. Distances are scaled
/// with the WGS-84 curvature radii evaluated once at the origin latitude.
class FrameOrigin {
public:
  const GeodeticCoord& origin() const noexcept { return origin_; }
  double meters_per_deg_lat() const noexcept { return lat_scale_; }
  double meters_per_deg_lon() const noexcept { return lon_scale_; }

  bool operator==(const FrameOrigin&) const = default;

  friend FrameOrigin make_origin(const GeodeticCoord& origin);

private:
  FrameOrigin(GeodeticCoord o, double lat_scale, double lon_scale)
      : origin_(o), lat_scale_(lat_scale), lon_scale_(lon_scale) {}

  GeodeticCoord origin_;
  double lat_scale_;
  double lon_scale_;
};

inline FrameOrigin make_origin(const GeodeticCoord& origin) {
  if (!is_valid(origin)) throw InvalidArgument("invalid geodetic origin");
  if (std::abs(origin.latitude_deg) >= 89.0)
    throw PolarOrigin("origin latitude " + std::to_string(origin.latitude_deg) +
                      " is within 1 degree of a pole");
  constexpr double rad = std::numbers::pi / 180.0;
  const double lat_scale = wgs84::meridional_radius(origin.latitude_deg) * rad;
  const double lon_scale = wgs84::prime_vertical_radius(origin.latitude_deg) *
                           std::cos(origin.latitude_deg * rad) * rad;
  return FrameOrigin(origin, lat_scale, lon_scale);
}

inline NedPosition geodetic_to_ned(const FrameOrigin& frame, const GeodeticCoord& p) {
  const GeodeticCoord& o = frame.origin();
  const NedPosition ned{(p.latitude_deg - o.latitude_deg) * frame.meters_per_deg_lat(),
                        normalize_longitude(p.longitude_deg - o.longitude_deg) *
                            frame.meters_per_deg_lon(),
                        o.altitude_m - p.altitude_m};
  if (!ned.finite()) throw InvalidArgument("non-finite geodetic coordinate");
  if (ned.horizontal_norm() > kMaxFrameOffsetM)
    throw OutOfFrame("point lies " + std::to_string(ned.horizontal_norm()) +
                     " m from the frame origin (limit 50 km)");
  return ned;
}

inline GeodeticCoord ned_to_geodetic(const FrameOrigin& frame, const NedPosition& p) {
  if (!p.finite()) throw InvalidArgument("non-finite NED position");
  const GeodeticCoord& o = frame.origin();
  return {o.latitude_deg + p.north / frame.meters_per_deg_lat(),
          normalize_longitude(o.longitude_deg + p.east / frame.meters_per_deg_lon()),
          o.altitude_m - p.down};
}

}  // namespace skyrig
