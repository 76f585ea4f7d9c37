#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "skyrig/geodesy.hpp"
#include "skyrig/vehicle.hpp"

namespace skyrig {

struct Waypoint {
  NedPosition position;
  double capture_radius_m = 1.0;
  bool operator==(const Waypoint&) const = default;
};

enum class NavigationSource { Truth, Gps };

struct MissionPlan {
  std::vector<Waypoint> waypoints;
  bool land_after = true;
  NavigationSource navigation = NavigationSource::Truth;
  bool operator==(const MissionPlan&) const = default;
};

struct ControllerParams {
  double gain_per_s = 1.0;
  double max_speed_mps = 10.0;
  double descent_speed_mps = 2.0;
};

struct Command {
  NedVelocity velocity;
  std::size_t active_idx = 0;
  // Set once the plan is exhausted and the UAV should descend.
  bool request_landing = false;
};

inline NedVelocity clamp_magnitude(const NedVelocity& v, double max_norm) {
  const double n = v.norm();
  if (n <= max_norm || n == 0.0) return v;
  return v * (max_norm / n);
}

/// Proportional go-to-waypoint control. A waypoint is captured when the
/// estimate is within its capture radius; the cursor then advances by one.
/// Once past the last waypoint the UAV either descends (land_after) or
/// holds at the last waypoint.
inline Command compute_command(const NedPosition& est_position, const MissionPlan& plan,
                               std::size_t active_idx, const ControllerParams& params) {
  Command out;
  out.active_idx = active_idx;
  const std::size_t n = plan.waypoints.size();
  if (out.active_idx < n) {
    const Waypoint& wp = plan.waypoints[out.active_idx];
    if (distance(wp.position, est_position) <= wp.capture_radius_m) ++out.active_idx;
  }
  if (out.active_idx >= n) {
    if (plan.land_after) {
      out.request_landing = true;
      out.velocity = {0.0, 0.0, params.descent_speed_mps};
      return out;
    }
    const NedVelocity err = plan.waypoints.back().position - est_position;
    out.velocity = clamp_magnitude(err * params.gain_per_s, params.max_speed_mps);
    return out;
  }
  const NedVelocity err = plan.waypoints[out.active_idx].position - est_position;
  out.velocity = clamp_magnitude(err * params.gain_per_s, params.max_speed_mps);
  return out;
}

struct Segment {
  NedPosition from;
  NedPosition to;
  bool operator==(const Segment&) const = default;
};

/// Reference path for deviation checks: previous waypoint (or home) to the
/// active waypoint. Past the end it degenerates to the last waypoint.
inline Segment active_segment(const MissionPlan& plan, const NedPosition& home,
                              std::size_t active_idx) {
  const auto& wps = plan.waypoints;
  if (active_idx >= wps.size()) return {wps.back().position, wps.back().position};
  return {active_idx == 0 ? home : wps[active_idx - 1].position, wps[active_idx].position};
}

}  // namespace skyrig
