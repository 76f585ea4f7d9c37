#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "skyrig/error.hpp"
#include "skyrig/geodesy.hpp"
#include "skyrig/rng.hpp"

namespace skyrig {

enum class FlightPhase { Idle, Enroute, Landing, Landed, Crashed };

inline std::string_view to_string(FlightPhase p) {
  switch (p) {
    case FlightPhase::Idle: return "idle";
    case FlightPhase::Enroute: return "enroute";
    case FlightPhase::Landing: return "landing";
    case FlightPhase::Landed: return "landed";
    case FlightPhase::Crashed: return "crashed";
  }
  return "unknown";
}

inline bool is_terminal(FlightPhase p) {
  return p == FlightPhase::Landed || p == FlightPhase::Crashed;
}

inline bool is_airborne(FlightPhase p) {
  return p == FlightPhase::Enroute || p == FlightPhase::Landing;
}

/// Idle -> Enroute -> Landing -> Landed, plus Crashed from any
/// non-terminal phase.
inline bool is_allowed_transition(FlightPhase from, FlightPhase to) {
  if (is_terminal(from)) return false;
  if (to == FlightPhase::Crashed) return true;
  return (from == FlightPhase::Idle && to == FlightPhase::Enroute) ||
         (from == FlightPhase::Enroute && to == FlightPhase::Landing) ||
         (from == FlightPhase::Landing && to == FlightPhase::Landed);
}

struct UavState {
  std::string id;
  NedPosition position;
  NedVelocity velocity;
  double heading_deg = 0.0;
  FlightPhase phase = FlightPhase::Idle;
  double time_s = 0.0;

  bool operator==(const UavState&) const = default;
};

struct GpsConfig {
  bool enabled = true;
  double noise_std_m = 0.0;
  double update_hz = 10.0;
  bool operator==(const GpsConfig&) const = default;
};

struct BarometerConfig {
  bool enabled = true;
  double noise_std_m = 0.0;
  bool operator==(const BarometerConfig&) const = default;
};

struct MagnetometerConfig {
  bool enabled = true;
  double noise_std_deg = 0.0;
  bool operator==(const MagnetometerConfig&) const = default;
};

struct SensorSuiteConfig {
  GpsConfig gps;
  BarometerConfig barometer;
  MagnetometerConfig magnetometer;
  // Sensors such as camera or lidar: echoed back, never simulated.
  std::vector<std::string> declared_unsupported;

  bool operator==(const SensorSuiteConfig&) const = default;
};

struct GpsFix {
  double time_s = 0.0;
  GeodeticCoord position_estimate;
  NedPosition ned;
};

struct VehicleParams {
  double max_speed_mps = 10.0;
  double descent_speed_mps = 2.0;
  double body_radius_m = 0.3;
  bool operator==(const VehicleParams&) const = default;
};

/// Commands below this horizontal speed leave the heading unchanged.
inline constexpr double kHeadingHoldSpeedMps = 0.1;

/// Kinematic point-mass step: wind adds directly to the commanded ground
/// velocity. Phase is left to the caller.
inline UavState step_dynamics(const UavState& state, const NedVelocity& cmd,
                              const NedVelocity& wind, double dt_s, const VehicleParams&) {
  UavState next = state;
  next.velocity = cmd + wind;
  next.position = state.position + next.velocity * dt_s;
  if (cmd.horizontal_norm() > kHeadingHoldSpeedMps)
    next.heading_deg = normalize_heading(std::atan2(cmd.east, cmd.north) * 180.0 / std::numbers::pi);
  next.time_s = state.time_s + dt_s;
  return next;
}

namespace detail {
inline double gaussian(RngStream& rng, double stddev) {
  // Always draw so the stream position does not depend on the std value.
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng) * stddev;
}
}  // namespace detail

inline GpsFix sample_gps(const UavState& state, const GpsConfig& cfg, const FrameOrigin& frame,
                         RngStream& rng) {
  if (!cfg.enabled) throw SensorDisabled("GPS is disabled for " + state.id);
  GpsFix fix;
  fix.time_s = state.time_s;
  fix.ned = state.position;
  fix.ned.north += detail::gaussian(rng, cfg.noise_std_m);
  fix.ned.east += detail::gaussian(rng, cfg.noise_std_m);
  fix.ned.down += detail::gaussian(rng, cfg.noise_std_m);
  fix.position_estimate = ned_to_geodetic(frame, fix.ned);
  return fix;
}

/// Altitude above the ellipsoid.
inline double sample_barometer(const UavState& state, const BarometerConfig& cfg,
                               const FrameOrigin& frame, RngStream& rng) {
  if (!cfg.enabled) throw SensorDisabled("barometer is disabled for " + state.id);
  return frame.origin().altitude_m - state.position.down + detail::gaussian(rng, cfg.noise_std_m);
}

inline double sample_magnetometer(const UavState& state, const MagnetometerConfig& cfg,
                                  RngStream& rng) {
  if (!cfg.enabled) throw SensorDisabled("magnetometer is disabled for " + state.id);
  return normalize_heading(state.heading_deg + detail::gaussian(rng, cfg.noise_std_deg));
}

}  // namespace skyrig
