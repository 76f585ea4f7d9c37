#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skyrig/geodesy.hpp"
#include "skyrig/mission.hpp"
#include "skyrig/monitors.hpp"
#include "skyrig/rng.hpp"
#include "skyrig/scenario.hpp"
#include "skyrig/vehicle.hpp"
#include "skyrig/world.hpp"

namespace skyrig {

enum class Termination { Completed, TimedOut, AllCrashed };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::TimedOut: return "timed_out";
    case Termination::AllCrashed: return "all_crashed";
  }
  return "unknown";
}

struct TelemetryRecord {
  std::size_t tick = 0;
  double time_s = 0.0;
  std::string uav_id;
  NedPosition position;
  GeodeticCoord geodetic;
  double speed_mps = 0.0;
  double altitude_m = 0.0;  // above the ellipsoid
  double heading_deg = 0.0;
  FlightPhase phase = FlightPhase::Idle;
  std::size_t active_waypoint = 0;
  std::optional<NedPosition> gps_estimate;
  std::optional<double> baro_altitude_m;
  std::optional<double> mag_heading_deg;

  bool operator==(const TelemetryRecord&) const = default;
};

struct RunEvent {
  std::size_t tick = 0;
  double time_s = 0.0;
  std::string uav_id;
  std::string kind;  // "phase" | "waypoint_captured" | "collision"
  std::string detail;

  bool operator==(const RunEvent&) const = default;
};

struct RunArtifacts {
  ScenarioSpec scenario;
  std::uint64_t seed = 0;
  std::vector<TelemetryRecord> telemetry;
  std::vector<ViolationRecord> violations;
  std::vector<RunEvent> events;
  Termination termination = Termination::Completed;
  std::size_t ticks_executed = 0;
};

struct RunOptions {
  // Called after each tick completes (used by the bench for timing).
  std::function<void(std::size_t tick)> on_tick;
};

/// Telemetry is sampled every tick; GPS every `gps_period_ticks` ticks
/// starting with tick 1.
inline std::size_t gps_period_ticks(const GpsConfig& gps, double dt_s) {
  const double ticks = 1.0 / (gps.update_hz * dt_s);
  return static_cast<std::size_t>(std::max<long long>(1, std::llround(ticks)));
}

namespace detail {

struct UavRuntime {
  const ResolvedUav* spec = nullptr;
  UavState state;
  std::size_t active_idx = 0;
  RngStream gps_rng;
  RngStream baro_rng;
  RngStream mag_rng;
  std::size_t gps_period = 1;
  std::optional<GpsFix> last_fix;
  std::optional<double> last_baro;
  std::optional<double> last_mag;

  bool done() const {
    return is_terminal(state.phase) ||
           (!spec->plan.land_after && active_idx >= spec->plan.waypoints.size());
  }
};

}  // namespace detail

/// Fixed-timestep simulation of the whole fleet. Per tick: wind is sampled,
/// each UAV samples its due sensors, computes a command and steps; then
/// collisions and touchdowns are resolved, monitors observe the post-step
/// snapshot, and telemetry is appended. Runs until every UAV is done or
/// sim.max_duration_s elapses.
inline RunArtifacts run_simulation(const ScenarioSpec& spec, const WorldModel& world,
                                   const RunOptions& options = {}) {
  const ResolvedScenario rs = resolve(spec, world);
  const double dt = rs.sim.dt_s;
  const std::size_t max_ticks = rs.sim.max_ticks();
  const std::uint64_t seed = rs.sim.seed;

  std::vector<detail::UavRuntime> fleet;
  fleet.reserve(rs.uavs.size());
  for (std::size_t i = 0; i < rs.uavs.size(); ++i) {
    const ResolvedUav& u = rs.uavs[i];
    detail::UavRuntime rt;
    rt.spec = &u;
    rt.state.id = u.id;
    rt.state.position = u.home;
    rt.gps_rng = derive_rng_stream(seed, i, SensorKind::Gps, StreamPurpose::SensorNoise);
    rt.baro_rng = derive_rng_stream(seed, i, SensorKind::Barometer, StreamPurpose::SensorNoise);
    rt.mag_rng = derive_rng_stream(seed, i, SensorKind::Magnetometer, StreamPurpose::SensorNoise);
    rt.gps_period = gps_period_ticks(u.sensors.gps, dt);
    fleet.push_back(std::move(rt));
  }

  RunArtifacts out;
  out.scenario = spec;
  out.seed = seed;
  out.telemetry.reserve(fleet.size() * std::min<std::size_t>(max_ticks, 1 << 16));
  SafetyMonitor monitor(rs.properties);

  auto event = [&](std::size_t tick, const std::string& id, std::string kind, std::string detail) {
    out.events.push_back({tick, static_cast<double>(tick) * dt, id, std::move(kind), std::move(detail)});
  };
  auto transition = [&](std::size_t tick, detail::UavRuntime& rt, FlightPhase to) {
    event(tick, rt.state.id, "phase",
          std::string(to_string(rt.state.phase)) + "->" + std::string(to_string(to)));
    rt.state.phase = to;
  };

  std::size_t tick = 0;
  while (tick < max_ticks) {
    ++tick;
    const double t_prev = static_cast<double>(tick - 1) * dt;
    const double t_now = static_cast<double>(tick) * dt;
    const NedVelocity wind = wind_at(rs.wind, t_prev);

    for (auto& rt : fleet) {
      if (is_terminal(rt.state.phase)) continue;
      if (rt.state.phase == FlightPhase::Idle) transition(tick, rt, FlightPhase::Enroute);
      const SensorSuiteConfig& sensors = rt.spec->sensors;
      if (sensors.gps.enabled && (tick - 1) % rt.gps_period == 0)
        rt.last_fix = sample_gps(rt.state, sensors.gps, rs.frame, rt.gps_rng);
      if (sensors.barometer.enabled)
        rt.last_baro = sample_barometer(rt.state, sensors.barometer, rs.frame, rt.baro_rng);
      if (sensors.magnetometer.enabled)
        rt.last_mag = sample_magnetometer(rt.state, sensors.magnetometer, rt.mag_rng);

      const bool use_gps = rt.spec->plan.navigation == NavigationSource::Gps && rt.last_fix;
      const NedPosition est = use_gps ? rt.last_fix->ned : rt.state.position;
      const Command cmd = compute_command(est, rt.spec->plan, rt.active_idx, rt.spec->controller);
      for (std::size_t k = rt.active_idx; k < cmd.active_idx; ++k)
        event(tick, rt.state.id, "waypoint_captured", std::to_string(k));
      rt.active_idx = cmd.active_idx;
      if (cmd.request_landing && rt.state.phase == FlightPhase::Enroute)
        transition(tick, rt, FlightPhase::Landing);

      rt.state = step_dynamics(rt.state, cmd.velocity, wind, dt, rt.spec->vehicle);
      rt.state.time_s = t_now;
    }

    // Collisions and touchdowns on the post-step snapshot.
    std::vector<CollisionBody> bodies;
    for (const auto& rt : fleet)
      if (is_airborne(rt.state.phase))
        bodies.push_back({rt.state.id, rt.state.position, rt.spec->vehicle.body_radius_m});
    std::vector<std::pair<std::size_t, CollisionEvent>> crashes;
    std::vector<std::size_t> touchdowns;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      const auto& rt = fleet[i];
      if (!is_airborne(rt.state.phase)) continue;
      const bool landing = rt.state.phase == FlightPhase::Landing;
      if (auto ev = check_collision(rt.state, rt.spec->vehicle.body_radius_m, world, bodies, !landing))
        crashes.emplace_back(i, *ev);
      else if (landing && height_above_terrain(world, rt.state.position) <= 0.0)
        touchdowns.push_back(i);
    }
    for (auto& [i, ev] : crashes) {
      auto& rt = fleet[i];
      transition(tick, rt, FlightPhase::Crashed);
      rt.state.velocity = {};
      event(tick, rt.state.id, "collision", std::string(to_string(ev.kind)) + (ev.other.empty() ? "" : ":" + ev.other));
      monitor.on_collision(rt.state.id, ev, rt.state.position, tick, t_now);
    }
    for (std::size_t i : touchdowns) {
      auto& rt = fleet[i];
      rt.state.position.down = 0.0 - terrain_elevation_clamped(world, rt.state.position.north, rt.state.position.east);
      rt.state.velocity = {};
      transition(tick, rt, FlightPhase::Landed);
      monitor.on_landed(rt.state, tick);
    }

    TickSnapshot snap{tick, t_now, {}};
    snap.uavs.reserve(fleet.size());
    for (const auto& rt : fleet)
      snap.uavs.push_back({rt.state.id, rt.state.position, rt.state.phase, rt.active_idx,
                           active_segment(rt.spec->plan, rt.spec->home, rt.active_idx)});
    monitor.evaluate_tick(snap);

    for (const auto& rt : fleet) {
      TelemetryRecord rec;
      rec.tick = tick;
      rec.time_s = t_now;
      rec.uav_id = rt.state.id;
      rec.position = rt.state.position;
      rec.geodetic = ned_to_geodetic(rs.frame, rt.state.position);
      rec.speed_mps = rt.state.velocity.norm();
      rec.altitude_m = rec.geodetic.altitude_m;
      rec.heading_deg = rt.state.heading_deg;
      rec.phase = rt.state.phase;
      rec.active_waypoint = rt.active_idx;
      if (rt.last_fix) rec.gps_estimate = rt.last_fix->ned;
      rec.baro_altitude_m = rt.last_baro;
      rec.mag_heading_deg = rt.last_mag;
      out.telemetry.push_back(std::move(rec));
    }
    if (options.on_tick) options.on_tick(tick);

    if (std::all_of(fleet.begin(), fleet.end(), [](const auto& rt) { return rt.done(); })) break;
  }

  out.ticks_executed = tick;
  const bool all_done = std::all_of(fleet.begin(), fleet.end(), [](const auto& rt) { return rt.done(); });
  const bool all_crashed = std::all_of(fleet.begin(), fleet.end(),
                                       [](const auto& rt) { return rt.state.phase == FlightPhase::Crashed; });
  out.termination = all_crashed ? Termination::AllCrashed
                    : all_done  ? Termination::Completed
                                : Termination::TimedOut;

  std::vector<UavState> finals;
  for (const auto& rt : fleet) finals.push_back(rt.state);
  monitor.finalize(finals, tick, static_cast<double>(tick) * dt);
  out.violations = monitor.records();
  return out;
}

}  // namespace skyrig
