#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "skyrig/error.hpp"
#include "skyrig/geodesy.hpp"
#include "skyrig/mission.hpp"
#include "skyrig/vehicle.hpp"
#include "skyrig/world.hpp"

namespace skyrig {

// ---------------------------------------------------------------------------
// Property definitions
// ---------------------------------------------------------------------------

struct Circle2D {
  Point2 center;
  double radius_m = 1.0;
  bool operator==(const Circle2D&) const = default;
};

using LandingZone = std::variant<Polygon2D, Circle2D>;

struct MaxPathDeviation {
  double max_m = 1.0;
  bool operator==(const MaxPathDeviation&) const = default;
};
struct MinSeparation {
  double min_m = 1.0;
  bool operator==(const MinSeparation&) const = default;
};
struct NoCollision {
  bool operator==(const NoCollision&) const = default;
};
struct SafeLanding {
  std::vector<LandingZone> zones;
  bool operator==(const SafeLanding&) const = default;
};
struct NoFlyZone {
  Polygon2D polygon;
  AltitudeBand band;
  bool operator==(const NoFlyZone&) const = default;
};

using PropertyKind = std::variant<MaxPathDeviation, MinSeparation, NoCollision, SafeLanding, NoFlyZone>;

inline std::string_view kind_name(const PropertyKind& k) {
  constexpr std::string_view names[] = {"max_path_deviation", "min_separation", "no_collision",
                                        "safe_landing", "no_fly_zone"};
  return names[k.index()];
}

struct SafetyProperty {
  std::string id;
  // nullopt applies the property to every UAV.
  std::optional<std::vector<std::string>> scope;
  PropertyKind kind;

  bool applies_to(const std::string& uav_id) const {
    return !scope || std::find(scope->begin(), scope->end(), uav_id) != scope->end();
  }
  bool operator==(const SafetyProperty&) const = default;
};

/// One contiguous violation episode.
struct ViolationRecord {
  std::string property_id;
  std::string kind;
  std::vector<std::string> uav_ids;
  std::size_t start_tick = 0;
  std::size_t end_tick = 0;
  double start_time_s = 0.0;
  double end_time_s = 0.0;
  std::optional<double> worst_value;
  std::optional<double> threshold;
  std::string units;
  std::optional<NedPosition> position;
  std::string detail;

  bool operator==(const ViolationRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Geometric checks
// ---------------------------------------------------------------------------

/// Distance from pos to the closed segment.
inline double cross_track_deviation(const NedPosition& pos, const Segment& seg) {
  const Ned d = seg.to - seg.from;
  const double len2 = d.dot(d);
  if (len2 == 0.0) return distance(pos, seg.from);
  const double t = std::clamp((pos - seg.from).dot(d) / len2, 0.0, 1.0);
  return distance(pos, seg.from + d * t);
}

/// Deviation from the intended path. While landing the intended path is the
/// vertical line through the final waypoint, so only horizontal offset
/// counts.
inline double path_deviation(const NedPosition& pos, const Segment& reference, FlightPhase phase) {
  if (phase == FlightPhase::Landing)
    return std::hypot(pos.north - reference.to.north, pos.east - reference.to.east);
  return cross_track_deviation(pos, reference);
}

struct SeparationResult {
  double distance_m = 0.0;
  std::size_t first = 0;
  std::size_t second = 0;
};

/// Minimum distance over airborne pairs; pair indices refer to `states`
/// with first < second.
inline std::optional<SeparationResult> min_pairwise_separation(std::span<const UavState> states) {
  std::optional<SeparationResult> best;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (!is_airborne(states[i].phase)) continue;
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      if (!is_airborne(states[j].phase)) continue;
      const double d = distance(states[i].position, states[j].position);
      if (!best || d < best->distance_m) best = SeparationResult{d, i, j};
    }
  }
  return best;
}

inline bool check_no_fly(const NedPosition& pos, const NoFlyZone& zone) {
  return point_in_polygon(zone.polygon, pos.north, pos.east) && zone.band.contains(-pos.down);
}

enum class CollisionKind { Terrain, Obstacle, Uav };

inline std::string_view to_string(CollisionKind k) {
  switch (k) {
    case CollisionKind::Terrain: return "terrain";
    case CollisionKind::Obstacle: return "obstacle";
    case CollisionKind::Uav: return "uav";
  }
  return "unknown";
}

struct CollisionEvent {
  CollisionKind kind = CollisionKind::Terrain;
  // Terrain: height above terrain. Obstacle: distance to box surface.
  // Uav: center distance.
  double value = 0.0;
  double threshold = 0.0;
  std::string other;  // obstacle index or UAV id
};

struct CollisionBody {
  std::string id;
  NedPosition position;
  double body_radius_m = 0.3;
};

inline double height_above_terrain(const WorldModel& world, const NedPosition& p) {
  return -p.down - terrain_elevation_clamped(world, p.north, p.east);
}

/// First match in the order terrain, obstacle, uav. UAV contact is
/// center distance below the sum of both body radii.
inline std::optional<CollisionEvent> check_collision(const UavState& state, double body_radius_m,
                                                     const WorldModel& world,
                                                     std::span<const CollisionBody> others,
                                                     bool include_terrain = true) {
  if (include_terrain) {
    const double h = height_above_terrain(world, state.position);
    if (h <= 0.0) return CollisionEvent{CollisionKind::Terrain, h, 0.0, ""};
  }
  for (std::size_t i = 0; i < world.obstacles.size(); ++i) {
    const double d = world.obstacles[i].distance_to(state.position);
    if (d < body_radius_m)
      return CollisionEvent{CollisionKind::Obstacle, d, body_radius_m, std::to_string(i)};
  }
  for (const auto& other : others) {
    if (other.id == state.id) continue;
    const double d = distance(state.position, other.position);
    const double limit = body_radius_m + other.body_radius_m;
    if (d < limit) return CollisionEvent{CollisionKind::Uav, d, limit, other.id};
  }
  return std::nullopt;
}

inline bool zone_contains(const LandingZone& zone, double north_m, double east_m) {
  if (const auto* poly = std::get_if<Polygon2D>(&zone)) return point_in_polygon(*poly, north_m, east_m);
  const auto& c = std::get<Circle2D>(zone);
  return std::hypot(north_m - c.center.north, east_m - c.center.east) <= c.radius_m;
}

/// Horizontal distance to the nearest zone, 0 when inside one.
inline double landing_miss_distance(std::span<const LandingZone> zones, double north_m, double east_m) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& zone : zones) {
    if (zone_contains(zone, north_m, east_m)) return 0.0;
    if (const auto* poly = std::get_if<Polygon2D>(&zone)) {
      best = std::min(best, poly->boundary_distance(north_m, east_m));
    } else {
      const auto& c = std::get<Circle2D>(zone);
      best = std::min(best, std::hypot(north_m - c.center.north, east_m - c.center.east) - c.radius_m);
    }
  }
  return best;
}

inline bool check_landing(const UavState& final_state, std::span<const LandingZone> zones) {
  if (final_state.phase != FlightPhase::Landed)
    throw NotLanded(final_state.id + " has not landed (phase " +
                    std::string(to_string(final_state.phase)) + ")");
  return std::any_of(zones.begin(), zones.end(), [&](const LandingZone& z) {
    return zone_contains(z, final_state.position.north, final_state.position.east);
  });
}

// ---------------------------------------------------------------------------
// Episode tracking
// ---------------------------------------------------------------------------

struct UavSnapshot {
  std::string id;
  NedPosition position;
  FlightPhase phase = FlightPhase::Idle;
  std::size_t active_idx = 0;
  Segment reference;
};

struct TickSnapshot {
  std::size_t tick = 0;
  double time_s = 0.0;
  std::vector<UavSnapshot> uavs;
};

/// A sample that violates a continuous property at one tick.
struct TickViolation {
  std::size_t property_index = 0;
  std::vector<std::size_t> subjects;  // indices into the snapshot's UAVs
  double value = 0.0;
  double threshold = 0.0;
  NedPosition position;
};

namespace detail {
// Depth of a point inside a polygon: distance to the nearest edge.
inline double no_fly_depth(const NoFlyZone& z, const NedPosition& p) {
  return z.polygon.boundary_distance(p.north, p.east);
}
}  // namespace detail

/// Violations of the continuous properties (path deviation, separation,
/// no-fly) in one snapshot. Only airborne UAVs are considered.
inline std::vector<TickViolation> violations_at(std::span<const SafetyProperty> properties,
                                                const TickSnapshot& snap) {
  std::vector<TickViolation> out;
  const auto& uavs = snap.uavs;
  for (std::size_t p = 0; p < properties.size(); ++p) {
    const SafetyProperty& prop = properties[p];
    if (const auto* dev = std::get_if<MaxPathDeviation>(&prop.kind)) {
      for (std::size_t i = 0; i < uavs.size(); ++i) {
        if (!is_airborne(uavs[i].phase) || !prop.applies_to(uavs[i].id)) continue;
        const double d = path_deviation(uavs[i].position, uavs[i].reference, uavs[i].phase);
        if (d > dev->max_m) out.push_back({p, {i}, d, dev->max_m, uavs[i].position});
      }
    } else if (const auto* sep = std::get_if<MinSeparation>(&prop.kind)) {
      for (std::size_t i = 0; i < uavs.size(); ++i) {
        if (!is_airborne(uavs[i].phase) || !prop.applies_to(uavs[i].id)) continue;
        for (std::size_t j = i + 1; j < uavs.size(); ++j) {
          if (!is_airborne(uavs[j].phase) || !prop.applies_to(uavs[j].id)) continue;
          const double d = distance(uavs[i].position, uavs[j].position);
          if (d < sep->min_m) out.push_back({p, {i, j}, d, sep->min_m, uavs[i].position});
        }
      }
    } else if (const auto* nfz = std::get_if<NoFlyZone>(&prop.kind)) {
      for (std::size_t i = 0; i < uavs.size(); ++i) {
        if (!is_airborne(uavs[i].phase) || !prop.applies_to(uavs[i].id)) continue;
        if (check_no_fly(uavs[i].position, *nfz))
          out.push_back({p, {i}, detail::no_fly_depth(*nfz, uavs[i].position), 0.0, uavs[i].position});
      }
    }
  }
  return out;
}

/// Online episode builder. A violating tick opens or extends an episode for
/// its (property, subject); a tick without that violation closes it.
class SafetyMonitor {
public:
  explicit SafetyMonitor(std::vector<SafetyProperty> properties)
      : properties_(std::move(properties)) {}

  const std::vector<SafetyProperty>& properties() const noexcept { return properties_; }

  void evaluate_tick(const TickSnapshot& snap) {
    std::map<Key, bool> seen;
    for (const TickViolation& v : violations_at(properties_, snap)) {
      std::vector<std::string> ids;
      for (std::size_t s : v.subjects) ids.push_back(snap.uavs[s].id);
      Key key{v.property_index, ids};
      seen[key] = true;
      auto it = open_.find(key);
      if (it == open_.end()) {
        ViolationRecord rec = make_record(v.property_index, ids, snap.tick, snap.time_s);
        rec.worst_value = v.value;
        rec.threshold = v.threshold;
        rec.position = v.position;
        open_.emplace(key, std::move(rec));
      } else {
        ViolationRecord& rec = it->second;
        rec.end_tick = snap.tick;
        rec.end_time_s = snap.time_s;
        if (is_worse(v.property_index, v.value, *rec.worst_value)) {
          rec.worst_value = v.value;
          rec.position = v.position;
        }
      }
    }
    for (auto it = open_.begin(); it != open_.end();) {
      if (!seen.count(it->first)) {
        closed_.push_back(std::move(it->second));
        it = open_.erase(it);
      } else {
        ++it;
      }
    }
  }

  /// Records a crash against every NoCollision property covering the UAV.
  void on_collision(const std::string& uav_id, const CollisionEvent& ev, const NedPosition& pos,
                    std::size_t tick, double time_s) {
    for (std::size_t p = 0; p < properties_.size(); ++p) {
      if (!std::holds_alternative<NoCollision>(properties_[p].kind) || !properties_[p].applies_to(uav_id))
        continue;
      ViolationRecord rec = make_record(p, {uav_id}, tick, time_s);
      rec.worst_value = ev.value;
      rec.threshold = ev.threshold;
      rec.position = pos;
      rec.detail = std::string(to_string(ev.kind));
      if (!ev.other.empty()) rec.detail += ":" + ev.other;
      closed_.push_back(std::move(rec));
    }
  }

  /// Touchdown check for every SafeLanding property covering the UAV.
  void on_landed(const UavState& state, std::size_t tick) {
    for (std::size_t p = 0; p < properties_.size(); ++p) {
      const auto* landing = std::get_if<SafeLanding>(&properties_[p].kind);
      if (!landing || !properties_[p].applies_to(state.id)) continue;
      if (check_landing(state, landing->zones)) continue;
      ViolationRecord rec = make_record(p, {state.id}, tick, state.time_s);
      rec.worst_value = landing_miss_distance(landing->zones, state.position.north, state.position.east);
      rec.threshold = 0.0;
      rec.position = state.position;
      rec.detail = "landed outside all safe landing zones";
      closed_.push_back(std::move(rec));
    }
  }

  /// Closes open episodes and flags SafeLanding subjects that never landed.
  void finalize(std::span<const UavState> final_states, std::size_t tick, double time_s) {
    for (auto& [key, rec] : open_) closed_.push_back(std::move(rec));
    open_.clear();
    for (std::size_t p = 0; p < properties_.size(); ++p) {
      if (!std::holds_alternative<SafeLanding>(properties_[p].kind)) continue;
      for (const auto& s : final_states) {
        if (s.phase == FlightPhase::Landed || !properties_[p].applies_to(s.id)) continue;
        ViolationRecord rec = make_record(p, {s.id}, tick, time_s);
        rec.position = s.position;
        rec.detail = "never landed (final phase " + std::string(to_string(s.phase)) + ")";
        closed_.push_back(std::move(rec));
      }
    }
  }

  /// Episodes so far, ordered by start tick, then property order, then
  /// subject ids.
  std::vector<ViolationRecord> records() const {
    std::vector<ViolationRecord> out = closed_;
    for (const auto& [key, rec] : open_) out.push_back(rec);
    sort_records(out, properties_);
    return out;
  }

  static void sort_records(std::vector<ViolationRecord>& recs, std::span<const SafetyProperty> props) {
    auto order = [&](const std::string& id) {
      for (std::size_t i = 0; i < props.size(); ++i)
        if (props[i].id == id) return i;
      return props.size();
    };
    std::stable_sort(recs.begin(), recs.end(), [&](const ViolationRecord& a, const ViolationRecord& b) {
      return std::make_tuple(a.start_tick, order(a.property_id), a.uav_ids) <
             std::make_tuple(b.start_tick, order(b.property_id), b.uav_ids);
    });
  }

private:
  using Key = std::pair<std::size_t, std::vector<std::string>>;

  ViolationRecord make_record(std::size_t p, std::vector<std::string> ids, std::size_t tick,
                              double time_s) const {
    ViolationRecord rec;
    rec.property_id = properties_[p].id;
    rec.kind = std::string(kind_name(properties_[p].kind));
    rec.uav_ids = std::move(ids);
    rec.start_tick = rec.end_tick = tick;
    rec.start_time_s = rec.end_time_s = time_s;
    rec.units = "m";
    return rec;
  }

  // Separation is violated by small values; everything else by large ones.
  bool is_worse(std::size_t p, double candidate, double current) const {
    if (std::holds_alternative<MinSeparation>(properties_[p].kind)) return candidate < current;
    return candidate > current;
  }

  std::vector<SafetyProperty> properties_;
  std::map<Key, ViolationRecord> open_;
  std::vector<ViolationRecord> closed_;
};

}  // namespace skyrig
