#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "skyrig/error.hpp"
#include "skyrig/geodesy.hpp"
#include "skyrig/mission.hpp"
#include "skyrig/monitors.hpp"
#include "skyrig/vehicle.hpp"
#include "skyrig/world.hpp"

namespace skyrig {

inline constexpr int kScenarioFormatVersion = 1;

using PositionSpec = std::variant<NedPosition, GeodeticCoord>;

struct EnvironmentSpec {
  std::string map = "blocks";
  std::optional<GeodeticCoord> origin;
  WindField wind;
  std::string time_of_day = "12:00";  // metadata only
  bool operator==(const EnvironmentSpec&) const = default;
};

struct WaypointSpec {
  PositionSpec position;
  double capture_radius_m = 1.0;
  bool operator==(const WaypointSpec&) const = default;
};

struct PlanSpec {
  std::vector<WaypointSpec> waypoints;
  bool land_after = true;
  NavigationSource navigation = NavigationSource::Truth;
  bool operator==(const PlanSpec&) const = default;
};

struct UavSpec {
  std::string id;
  PositionSpec home;
  SensorSuiteConfig sensors;
  PlanSpec plan;
  VehicleParams vehicle;
  double gain_per_s = 1.0;
  bool operator==(const UavSpec&) const = default;
};

struct SimulationConfig {
  double dt_s = 0.02;
  double max_duration_s = 600.0;
  std::uint64_t seed = 0;

  std::size_t max_ticks() const { return static_cast<std::size_t>(std::llround(max_duration_s / dt_s)); }
  bool operator==(const SimulationConfig&) const = default;
};

struct ScenarioSpec {
  int format_version = kScenarioFormatVersion;
  EnvironmentSpec environment;
  std::vector<UavSpec> uavs;
  std::vector<SafetyProperty> test_properties;
  SimulationConfig sim;
  bool operator==(const ScenarioSpec&) const = default;
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string path;
  std::string message;

  bool is_error() const { return severity == Severity::Error; }
  std::string to_string() const {
    return std::string(is_error() ? "error" : "warning") + ": " + path + ": " + message;
  }
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.is_error(); });
}

/// Either a parsed spec or the full list of problems found.
struct ParseResult {
  std::optional<ScenarioSpec> spec;
  std::vector<Diagnostic> errors;

  bool ok() const { return spec.has_value(); }
};

inline constexpr double kMaxDtS = 0.1;
inline constexpr double kMaxTicks = 1e9;

namespace detail {

using nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}
inline std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

/// Strict reader: every problem is recorded and reading continues with a
/// default so later fields are still checked.
class SchemaReader {
public:
  std::vector<Diagnostic> errors;

  void error(const std::string& path, const std::string& msg) {
    errors.push_back({Diagnostic::Severity::Error, path.empty() ? "$" : path, msg});
  }

  bool object(const json& j, const std::string& path, std::initializer_list<const char*> known) {
    if (!j.is_object()) {
      error(path, "expected an object");
      return false;
    }
    for (auto it = j.begin(); it != j.end(); ++it)
      if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; }))
        error(join(path, it.key()), "unknown field '" + it.key() + "'");
    return true;
  }

  const json* field(const json& j, const char* key, const std::string& path, bool required) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) error(join(path, key), "missing required field");
      return nullptr;
    }
    return &*it;
  }

  template <class Pred>
  double number(const json& j, const char* key, const std::string& path, double def, bool required,
                Pred pred, const char* constraint) {
    const json* v = field(j, key, path, required);
    if (!v) return def;
    const std::string p = join(path, key);
    if (!v->is_number()) {
      error(p, "expected a number");
      return def;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      error(p, "must be finite");
      return def;
    }
    if (!pred(d)) {
      error(p, std::string("must be ") + constraint);
      return def;
    }
    return d;
  }

  double any_number(const json& j, const char* key, const std::string& path, double def, bool required) {
    return number(j, key, path, def, required, [](double) { return true; }, "");
  }
  double positive(const json& j, const char* key, const std::string& path, double def, bool required = false) {
    return number(j, key, path, def, required, [](double d) { return d > 0.0; }, "> 0");
  }
  double non_negative(const json& j, const char* key, const std::string& path, double def,
                      bool required = false) {
    return number(j, key, path, def, required, [](double d) { return d >= 0.0; }, ">= 0");
  }

  bool boolean(const json& j, const char* key, const std::string& path, bool def) {
    const json* v = field(j, key, path, false);
    if (!v) return def;
    if (!v->is_boolean()) {
      error(join(path, key), "expected true or false");
      return def;
    }
    return v->get<bool>();
  }

  std::string string(const json& j, const char* key, const std::string& path, std::string def, bool required) {
    const json* v = field(j, key, path, required);
    if (!v) return def;
    if (!v->is_string() || v->get<std::string>().empty()) {
      error(join(path, key), "expected a non-empty string");
      return def;
    }
    return v->get<std::string>();
  }

  std::optional<PositionSpec> position(const json& j, const std::string& path) {
    if (!j.is_object()) {
      error(path, "expected a position object");
      return std::nullopt;
    }
    const bool geodetic = j.contains("lat") || j.contains("lon") || j.contains("alt");
    const std::size_t before = errors.size();
    if (geodetic) {
      object(j, path, {"lat", "lon", "alt"});
      GeodeticCoord g{number(j, "lat", path, 0.0, true, [](double d) { return d >= -90 && d <= 90; },
                             "within [-90, 90]"),
                      number(j, "lon", path, 0.0, true, [](double d) { return d >= -180 && d < 180; },
                             "within [-180, 180)"),
                      any_number(j, "alt", path, 0.0, true)};
      if (errors.size() != before) return std::nullopt;
      return g;
    }
    object(j, path, {"north", "east", "down"});
    NedPosition n{any_number(j, "north", path, 0.0, true), any_number(j, "east", path, 0.0, true),
                  any_number(j, "down", path, 0.0, true)};
    if (errors.size() != before) return std::nullopt;
    return n;
  }

  std::optional<Polygon2D> polygon(const json& j, const std::string& path) {
    if (!j.is_array()) {
      error(path, "expected an array of [north, east] pairs");
      return std::nullopt;
    }
    std::vector<Point2> pts;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const json& v = j[i];
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        error(index(path, i), "expected a [north, east] pair");
        return std::nullopt;
      }
      pts.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    try {
      return Polygon2D(std::move(pts));
    } catch (const InvalidArgument& e) {
      error(path, e.what());
      return std::nullopt;
    }
  }
};

inline bool valid_time_of_day(const std::string& s) {
  if (s.size() != 5 || s[2] != ':') return false;
  for (std::size_t i : {0u, 1u, 3u, 4u})
    if (s[i] < '0' || s[i] > '9') return false;
  const int h = (s[0] - '0') * 10 + (s[1] - '0');
  const int m = (s[3] - '0') * 10 + (s[4] - '0');
  return h < 24 && m < 60;
}

inline EnvironmentSpec read_environment(SchemaReader& r, const json& j, const std::string& path) {
  EnvironmentSpec env;
  if (!r.object(j, path, {"map", "origin", "wind", "time_of_day"})) return env;
  env.map = r.string(j, "map", path, env.map, true);
  if (const json* o = r.field(j, "origin", path, false)) {
    const std::string p = join(path, "origin");
    if (r.object(*o, p, {"lat", "lon", "alt"})) {
      const std::size_t before = r.errors.size();
      GeodeticCoord g{r.number(*o, "lat", p, 0.0, true, [](double d) { return std::abs(d) < 89.0; },
                               "within (-89, 89)"),
                      r.number(*o, "lon", p, 0.0, true, [](double d) { return d >= -180 && d < 180; },
                               "within [-180, 180)"),
                      r.any_number(*o, "alt", p, 0.0, true)};
      if (r.errors.size() == before) env.origin = g;
    }
  }
  if (const json* w = r.field(j, "wind", path, false)) {
    const std::string p = join(path, "wind");
    if (r.object(*w, p, {"direction_deg", "speed_mps", "gust_amplitude_mps", "gust_period_s"})) {
      env.wind.direction_deg = normalize_heading(r.any_number(*w, "direction_deg", p, 0.0, false));
      env.wind.speed_mps = r.non_negative(*w, "speed_mps", p, 0.0);
      env.wind.gust_amplitude_mps = r.non_negative(*w, "gust_amplitude_mps", p, 0.0);
      env.wind.gust_period_s = r.positive(*w, "gust_period_s", p, env.wind.gust_period_s);
    }
  }
  if (const json* t = r.field(j, "time_of_day", path, false)) {
    if (!t->is_string() || !valid_time_of_day(t->get<std::string>()))
      r.error(join(path, "time_of_day"), "expected a time as \"HH:MM\"");
    else
      env.time_of_day = t->get<std::string>();
  }
  return env;
}

inline SensorSuiteConfig read_sensors(SchemaReader& r, const json& j, const std::string& path) {
  SensorSuiteConfig s;
  if (!r.object(j, path, {"gps", "barometer", "magnetometer", "unsupported"})) return s;
  if (const json* g = r.field(j, "gps", path, false)) {
    const std::string p = join(path, "gps");
    if (r.object(*g, p, {"enabled", "noise_std_m", "update_hz"})) {
      s.gps.enabled = r.boolean(*g, "enabled", p, s.gps.enabled);
      s.gps.noise_std_m = r.non_negative(*g, "noise_std_m", p, s.gps.noise_std_m);
      s.gps.update_hz = r.positive(*g, "update_hz", p, s.gps.update_hz);
    }
  }
  if (const json* b = r.field(j, "barometer", path, false)) {
    const std::string p = join(path, "barometer");
    if (r.object(*b, p, {"enabled", "noise_std_m"})) {
      s.barometer.enabled = r.boolean(*b, "enabled", p, s.barometer.enabled);
      s.barometer.noise_std_m = r.non_negative(*b, "noise_std_m", p, s.barometer.noise_std_m);
    }
  }
  if (const json* m = r.field(j, "magnetometer", path, false)) {
    const std::string p = join(path, "magnetometer");
    if (r.object(*m, p, {"enabled", "noise_std_deg"})) {
      s.magnetometer.enabled = r.boolean(*m, "enabled", p, s.magnetometer.enabled);
      s.magnetometer.noise_std_deg = r.non_negative(*m, "noise_std_deg", p, s.magnetometer.noise_std_deg);
    }
  }
  if (const json* u = r.field(j, "unsupported", path, false)) {
    const std::string p = join(path, "unsupported");
    if (!u->is_array()) {
      r.error(p, "expected an array of sensor names");
    } else {
      for (std::size_t i = 0; i < u->size(); ++i) {
        if (!(*u)[i].is_string() || (*u)[i].get<std::string>().empty())
          r.error(index(p, i), "expected a sensor name");
        else
          s.declared_unsupported.push_back((*u)[i].get<std::string>());
      }
    }
  }
  return s;
}

inline PlanSpec read_plan(SchemaReader& r, const json& j, const std::string& path) {
  PlanSpec plan;
  if (!r.object(j, path, {"waypoints", "land_after", "navigation"})) return plan;
  if (const json* w = r.field(j, "waypoints", path, true)) {
    const std::string p = join(path, "waypoints");
    if (!w->is_array() || w->empty()) {
      r.error(p, "expected a non-empty array of waypoints");
    } else {
      for (std::size_t i = 0; i < w->size(); ++i) {
        const std::string wp_path = index(p, i);
        const json& wj = (*w)[i];
        if (!r.object(wj, wp_path, {"position", "capture_radius_m"})) continue;
        WaypointSpec wp;
        const json* pos = r.field(wj, "position", wp_path, true);
        std::optional<PositionSpec> parsed;
        if (pos) parsed = r.position(*pos, join(wp_path, "position"));
        wp.capture_radius_m = r.positive(wj, "capture_radius_m", wp_path, wp.capture_radius_m);
        if (parsed) {
          wp.position = *parsed;
          plan.waypoints.push_back(wp);
        }
      }
    }
  }
  plan.land_after = r.boolean(j, "land_after", path, plan.land_after);
  if (const json* n = r.field(j, "navigation", path, false)) {
    if (*n == "truth")
      plan.navigation = NavigationSource::Truth;
    else if (*n == "gps")
      plan.navigation = NavigationSource::Gps;
    else
      r.error(join(path, "navigation"), "expected \"truth\" or \"gps\"");
  }
  return plan;
}

inline std::optional<UavSpec> read_uav(SchemaReader& r, const json& j, const std::string& path) {
  if (!r.object(j, path, {"id", "home", "sensors", "plan", "vehicle", "controller"})) return std::nullopt;
  const std::size_t before = r.errors.size();
  UavSpec u;
  u.id = r.string(j, "id", path, "", true);
  if (const json* h = r.field(j, "home", path, true)) {
    if (auto pos = r.position(*h, join(path, "home"))) u.home = *pos;
  }
  if (const json* s = r.field(j, "sensors", path, false)) u.sensors = read_sensors(r, *s, join(path, "sensors"));
  if (const json* p = r.field(j, "plan", path, true)) u.plan = read_plan(r, *p, join(path, "plan"));
  if (const json* v = r.field(j, "vehicle", path, false)) {
    const std::string p = join(path, "vehicle");
    if (r.object(*v, p, {"max_speed_mps", "descent_speed_mps", "body_radius_m"})) {
      u.vehicle.max_speed_mps = r.positive(*v, "max_speed_mps", p, u.vehicle.max_speed_mps);
      u.vehicle.descent_speed_mps = r.positive(*v, "descent_speed_mps", p, u.vehicle.descent_speed_mps);
      u.vehicle.body_radius_m = r.positive(*v, "body_radius_m", p, u.vehicle.body_radius_m);
    }
  }
  if (const json* c = r.field(j, "controller", path, false)) {
    const std::string p = join(path, "controller");
    if (r.object(*c, p, {"gain_per_s"})) u.gain_per_s = r.positive(*c, "gain_per_s", p, u.gain_per_s);
  }
  if (r.errors.size() != before) return std::nullopt;
  return u;
}

inline std::optional<SafetyProperty> read_property(SchemaReader& r, const json& j, const std::string& path) {
  if (!j.is_object()) {
    r.error(path, "expected an object");
    return std::nullopt;
  }
  const std::size_t before = r.errors.size();
  SafetyProperty prop;
  prop.id = r.string(j, "id", path, "", true);
  const std::string kind = r.string(j, "kind", path, "", true);
  if (const json* s = r.field(j, "scope", path, false)) {
    const std::string p = join(path, "scope");
    if (*s == "all") {
      prop.scope.reset();
    } else if (s->is_array() && !s->empty()) {
      std::vector<std::string> ids;
      for (std::size_t i = 0; i < s->size(); ++i) {
        if (!(*s)[i].is_string() || (*s)[i].get<std::string>().empty())
          r.error(index(p, i), "expected a UAV id");
        else
          ids.push_back((*s)[i].get<std::string>());
      }
      prop.scope = std::move(ids);
    } else {
      r.error(p, "expected \"all\" or a non-empty array of UAV ids");
    }
  }
  if (kind == "max_path_deviation") {
    r.object(j, path, {"id", "kind", "scope", "max_m"});
    prop.kind = MaxPathDeviation{r.positive(j, "max_m", path, 1.0, true)};
  } else if (kind == "min_separation") {
    r.object(j, path, {"id", "kind", "scope", "min_m"});
    prop.kind = MinSeparation{r.positive(j, "min_m", path, 1.0, true)};
  } else if (kind == "no_collision") {
    r.object(j, path, {"id", "kind", "scope"});
    prop.kind = NoCollision{};
  } else if (kind == "safe_landing") {
    r.object(j, path, {"id", "kind", "scope", "zones"});
    SafeLanding landing;
    if (const json* z = r.field(j, "zones", path, true)) {
      const std::string p = join(path, "zones");
      if (!z->is_array() || z->empty()) {
        r.error(p, "expected a non-empty array of zones");
      } else {
        for (std::size_t i = 0; i < z->size(); ++i) {
          const std::string zp = index(p, i);
          const json& zj = (*z)[i];
          if (!r.object(zj, zp, {"circle", "polygon"})) continue;
          if (zj.size() != 1) {
            r.error(zp, "a zone has exactly one of \"circle\" or \"polygon\"");
            continue;
          }
          if (const json* c = r.field(zj, "circle", zp, false)) {
            const std::string cp = join(zp, "circle");
            if (r.object(*c, cp, {"north", "east", "radius_m"})) {
              Circle2D circle{{r.any_number(*c, "north", cp, 0.0, true), r.any_number(*c, "east", cp, 0.0, true)},
                              r.positive(*c, "radius_m", cp, 1.0, true)};
              landing.zones.emplace_back(circle);
            }
          } else if (const json* pg = r.field(zj, "polygon", zp, false)) {
            if (auto poly = r.polygon(*pg, join(zp, "polygon"))) landing.zones.emplace_back(*poly);
          }
        }
      }
    }
    prop.kind = std::move(landing);
  } else if (kind == "no_fly_zone") {
    r.object(j, path, {"id", "kind", "scope", "polygon", "floor_m", "ceiling_m"});
    NoFlyZone zone;
    if (const json* pg = r.field(j, "polygon", path, true)) {
      if (auto poly = r.polygon(*pg, join(path, "polygon"))) zone.polygon = *poly;
    }
    zone.band.floor_m = r.any_number(j, "floor_m", path, 0.0, false);
    if (const json* c = r.field(j, "ceiling_m", path, false); c && !c->is_null()) {
      const double ceiling = r.any_number(j, "ceiling_m", path, 0.0, false);
      if (c->is_number() && !(ceiling > zone.band.floor_m))
        r.error(join(path, "ceiling_m"), "must exceed floor_m");
      else
        zone.band.ceiling_m = ceiling;
    }
    prop.kind = std::move(zone);
  } else if (!kind.empty()) {
    r.error(join(path, "kind"), "unknown property kind '" + kind + "'");
  }
  if (r.errors.size() != before) return std::nullopt;
  return prop;
}

}  // namespace detail

inline ParseResult parse_scenario_json(const nlohmann::json& doc) {
  using detail::join;
  detail::SchemaReader r;
  ScenarioSpec spec;
  if (!r.object(doc, "", {"format_version", "environment", "uavs", "test_properties", "sim"}))
    return {std::nullopt, r.errors};

  if (const auto* v = r.field(doc, "format_version", "", true)) {
    if (!v->is_number_integer() || v->get<long long>() != kScenarioFormatVersion)
      r.error("format_version", "unsupported format version (expected 1)");
  }
  if (const auto* e = r.field(doc, "environment", "", true))
    spec.environment = detail::read_environment(r, *e, "environment");

  if (const auto* u = r.field(doc, "uavs", "", true)) {
    if (!u->is_array() || u->empty()) {
      r.error("uavs", "expected a non-empty array of UAVs");
    } else {
      for (std::size_t i = 0; i < u->size(); ++i)
        if (auto uav = detail::read_uav(r, (*u)[i], detail::index("uavs", i))) spec.uavs.push_back(*uav);
    }
  }

  if (const auto* t = r.field(doc, "test_properties", "", false)) {
    if (!t->is_array()) {
      r.error("test_properties", "expected an array");
    } else {
      std::set<std::string> ids;
      for (std::size_t i = 0; i < t->size(); ++i) {
        const std::string p = detail::index("test_properties", i);
        auto prop = detail::read_property(r, (*t)[i], p);
        if (!prop) continue;
        if (!ids.insert(prop->id).second) {
          r.error(join(p, "id"), "duplicate property id '" + prop->id + "'");
          continue;
        }
        spec.test_properties.push_back(std::move(*prop));
      }
    }
  }

  if (const auto* s = r.field(doc, "sim", "", false)) {
    if (r.object(*s, "sim", {"dt_s", "max_duration_s", "seed"})) {
      spec.sim.dt_s = r.number(*s, "dt_s", "sim", spec.sim.dt_s, false,
                               [](double d) { return d > 0.0 && d <= kMaxDtS; }, "in (0, 0.1]");
      spec.sim.max_duration_s = r.positive(*s, "max_duration_s", "sim", spec.sim.max_duration_s);
      if (spec.sim.max_duration_s / spec.sim.dt_s > kMaxTicks)
        r.error("sim.max_duration_s", "too many ticks for the given dt_s");
      if (const auto* seed = r.field(*s, "seed", "sim", false)) {
        if (!seed->is_number_unsigned())
          r.error("sim.seed", "expected a non-negative 64-bit integer");
        else
          spec.sim.seed = seed->get<std::uint64_t>();
      }
    }
  }

  if (!r.errors.empty()) return {std::nullopt, r.errors};
  return {spec, {}};
}

inline ParseResult parse_scenario(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    return {std::nullopt, {{Diagnostic::Severity::Error, "$", std::string("syntax error: ") + e.what()}}};
  }
  return parse_scenario_json(doc);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json position_to_json(const PositionSpec& p) {
  if (const auto* n = std::get_if<NedPosition>(&p)) return {{"north", n->north}, {"east", n->east}, {"down", n->down}};
  const auto& g = std::get<GeodeticCoord>(p);
  return {{"lat", g.latitude_deg}, {"lon", g.longitude_deg}, {"alt", g.altitude_m}};
}

inline nlohmann::json polygon_to_json(const Polygon2D& poly) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : poly.vertices()) out.push_back({v.north, v.east});
  return out;
}

inline nlohmann::json property_to_json(const SafetyProperty& p) {
  nlohmann::json out{{"id", p.id}, {"kind", kind_name(p.kind)}};
  if (p.scope)
    out["scope"] = *p.scope;
  else
    out["scope"] = "all";
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, MaxPathDeviation>) {
          out["max_m"] = k.max_m;
        } else if constexpr (std::is_same_v<K, MinSeparation>) {
          out["min_m"] = k.min_m;
        } else if constexpr (std::is_same_v<K, SafeLanding>) {
          nlohmann::json zones = nlohmann::json::array();
          for (const auto& z : k.zones) {
            if (const auto* c = std::get_if<Circle2D>(&z))
              zones.push_back({{"circle", {{"north", c->center.north}, {"east", c->center.east}, {"radius_m", c->radius_m}}}});
            else
              zones.push_back({{"polygon", polygon_to_json(std::get<Polygon2D>(z))}});
          }
          out["zones"] = zones;
        } else if constexpr (std::is_same_v<K, NoFlyZone>) {
          out["polygon"] = polygon_to_json(k.polygon);
          out["floor_m"] = k.band.floor_m;
          out["ceiling_m"] = k.band.ceiling_m ? nlohmann::json(*k.band.ceiling_m) : nlohmann::json(nullptr);
        }
      },
      p.kind);
  return out;
}

}  // namespace detail

/// Full document with every default written out.
inline nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
  using nlohmann::json;
  json env{{"map", spec.environment.map},
           {"wind",
            {{"direction_deg", spec.environment.wind.direction_deg},
             {"speed_mps", spec.environment.wind.speed_mps},
             {"gust_amplitude_mps", spec.environment.wind.gust_amplitude_mps},
             {"gust_period_s", spec.environment.wind.gust_period_s}}},
           {"time_of_day", spec.environment.time_of_day}};
  if (spec.environment.origin)
    env["origin"] = {{"lat", spec.environment.origin->latitude_deg},
                     {"lon", spec.environment.origin->longitude_deg},
                     {"alt", spec.environment.origin->altitude_m}};
  json uavs = json::array();
  for (const auto& u : spec.uavs) {
    json wps = json::array();
    for (const auto& w : u.plan.waypoints)
      wps.push_back({{"position", detail::position_to_json(w.position)}, {"capture_radius_m", w.capture_radius_m}});
    uavs.push_back(
        {{"id", u.id},
         {"home", detail::position_to_json(u.home)},
         {"sensors",
          {{"gps", {{"enabled", u.sensors.gps.enabled}, {"noise_std_m", u.sensors.gps.noise_std_m}, {"update_hz", u.sensors.gps.update_hz}}},
           {"barometer", {{"enabled", u.sensors.barometer.enabled}, {"noise_std_m", u.sensors.barometer.noise_std_m}}},
           {"magnetometer",
            {{"enabled", u.sensors.magnetometer.enabled}, {"noise_std_deg", u.sensors.magnetometer.noise_std_deg}}},
           {"unsupported", u.sensors.declared_unsupported}}},
         {"plan",
          {{"waypoints", wps},
           {"land_after", u.plan.land_after},
           {"navigation", u.plan.navigation == NavigationSource::Gps ? "gps" : "truth"}}},
         {"vehicle",
          {{"max_speed_mps", u.vehicle.max_speed_mps},
           {"descent_speed_mps", u.vehicle.descent_speed_mps},
           {"body_radius_m", u.vehicle.body_radius_m}}},
         {"controller", {{"gain_per_s", u.gain_per_s}}}});
  }
  json props = json::array();
  for (const auto& p : spec.test_properties) props.push_back(detail::property_to_json(p));
  return {{"format_version", spec.format_version},
          {"environment", env},
          {"uavs", uavs},
          {"test_properties", props},
          {"sim", {{"dt_s", spec.sim.dt_s}, {"max_duration_s", spec.sim.max_duration_s}, {"seed", spec.sim.seed}}}};
}

// ---------------------------------------------------------------------------
// Semantic validation and resolution into the map frame
// ---------------------------------------------------------------------------

struct ResolvedUav {
  std::string id;
  NedPosition home;
  SensorSuiteConfig sensors;
  MissionPlan plan;
  VehicleParams vehicle;
  ControllerParams controller;
};

/// Scenario with every position expressed in the map's NED frame.
struct ResolvedScenario {
  FrameOrigin frame;
  std::vector<ResolvedUav> uavs;
  std::vector<SafetyProperty> properties;
  WindField wind;
  SimulationConfig sim;
};

inline FrameOrigin scenario_frame(const ScenarioSpec& spec, const WorldModel& world) {
  return spec.environment.origin ? make_origin(*spec.environment.origin) : world.frame;
}

inline NedPosition to_ned(const FrameOrigin& frame, const PositionSpec& p) {
  if (const auto* n = std::get_if<NedPosition>(&p)) return *n;
  return geodetic_to_ned(frame, std::get<GeodeticCoord>(p));
}

/// Checks a parsed scenario against its map. Warnings do not make the
/// scenario invalid.
inline std::vector<Diagnostic> validate_semantics(const ScenarioSpec& spec, const WorldModel& world) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string path, std::string msg) {
    out.push_back({Diagnostic::Severity::Error, std::move(path), std::move(msg)});
  };
  auto warn = [&](std::string path, std::string msg) {
    out.push_back({Diagnostic::Severity::Warning, std::move(path), std::move(msg)});
  };
  std::optional<FrameOrigin> frame;
  try {
    frame = scenario_frame(spec, world);
  } catch (const Error& e) {
    error("environment.origin", e.what());
    return out;
  }

  std::set<std::string> ids;
  for (std::size_t i = 0; i < spec.uavs.size(); ++i) {
    const UavSpec& u = spec.uavs[i];
    const std::string path = "uavs[" + std::to_string(i) + "]";
    if (!ids.insert(u.id).second) error(path + ".id", "duplicate UAV id '" + u.id + "'");
    try {
      const NedPosition home = to_ned(*frame, u.home);
      if (!world.bounds.contains(home.north, home.east))
        error(path + ".home", "home of " + u.id + " lies outside the map bounds");
      for (std::size_t k = 0; k < world.obstacles.size(); ++k)
        if (world.obstacles[k].contains(home))
          error(path + ".home", "home of " + u.id + " lies inside obstacle " + std::to_string(k));
    } catch (const Error& e) {
      error(path + ".home", e.what());
    }
    if (u.plan.navigation == NavigationSource::Gps && !u.sensors.gps.enabled)
      error(path + ".plan.navigation", "navigation \"gps\" requires sensors.gps.enabled for " + u.id);
    for (const auto& name : u.sensors.declared_unsupported)
      warn(path + ".sensors.unsupported", "sensor '" + name + "' is accepted but not simulated");
    for (std::size_t w = 0; w < u.plan.waypoints.size(); ++w) {
      const std::string wp_path = path + ".plan.waypoints[" + std::to_string(w) + "].position";
      try {
        const NedPosition wp = to_ned(*frame, u.plan.waypoints[w].position);
        if (!world.bounds.contains(wp.north, wp.east)) {
          warn(wp_path, "waypoint lies outside the map bounds");
        } else {
          const double terrain = terrain_elevation(world, wp.north, wp.east);
          if (-wp.down < terrain)
            warn(wp_path, "waypoint lies " + std::to_string(terrain + wp.down) +
                              " m below terrain; the UAV will crash");
        }
      } catch (const Error& e) {
        error(wp_path, e.what());
      }
    }
  }
  for (std::size_t p = 0; p < spec.test_properties.size(); ++p) {
    const auto& prop = spec.test_properties[p];
    if (!prop.scope) continue;
    for (std::size_t s = 0; s < prop.scope->size(); ++s) {
      const std::string& id = (*prop.scope)[s];
      if (std::none_of(spec.uavs.begin(), spec.uavs.end(), [&](const UavSpec& u) { return u.id == id; }))
        error("test_properties[" + std::to_string(p) + "].scope[" + std::to_string(s) + "]",
              "unknown UAV id '" + id + "'");
    }
  }
  return out;
}

/// Converts every position to NED. Throws on conversion failure; call
/// validate_semantics first for a full report.
inline ResolvedScenario resolve(const ScenarioSpec& spec, const WorldModel& world) {
  ResolvedScenario out{scenario_frame(spec, world), {}, spec.test_properties, spec.environment.wind, spec.sim};
  for (const auto& u : spec.uavs) {
    ResolvedUav r;
    r.id = u.id;
    r.home = to_ned(out.frame, u.home);
    r.sensors = u.sensors;
    r.vehicle = u.vehicle;
    r.controller = {u.gain_per_s, u.vehicle.max_speed_mps, u.vehicle.descent_speed_mps};
    r.plan.land_after = u.plan.land_after;
    r.plan.navigation = u.plan.navigation;
    for (const auto& w : u.plan.waypoints) r.plan.waypoints.push_back({to_ned(out.frame, w.position), w.capture_radius_m});
    out.uavs.push_back(std::move(r));
  }
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace skyrig
