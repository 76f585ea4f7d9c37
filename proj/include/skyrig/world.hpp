#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skyrig/error.hpp"
#include "skyrig/geodesy.hpp"

namespace skyrig {

// ---------------------------------------------------------------------------
// 2D geometry
// ---------------------------------------------------------------------------

struct Point2 {
  double north = 0.0;
  double east = 0.0;

  bool operator==(const Point2&) const = default;
};

namespace detail {

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.north - o.north) * (b.east - o.east) - (a.east - o.east) * (b.north - o.north);
}

inline bool on_segment(const Point2& p, const Point2& a, const Point2& b) {
  if (cross(a, b, p) != 0.0) return false;
  return std::min(a.north, b.north) <= p.north && p.north <= std::max(a.north, b.north) &&
         std::min(a.east, b.east) <= p.east && p.east <= std::max(a.east, b.east);
}

inline int orientation(const Point2& a, const Point2& b, const Point2& c) {
  const double v = cross(a, b, c);
  return (v > 0.0) - (v < 0.0);
}

inline bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1,
                               const Point2& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  return (o1 == 0 && on_segment(q1, p1, p2)) || (o2 == 0 && on_segment(q2, p1, p2)) ||
         (o3 == 0 && on_segment(p1, q1, q2)) || (o4 == 0 && on_segment(p2, q1, q2));
}

inline double point_segment_distance_2d(const Point2& p, const Point2& a, const Point2& b) {
  const double dn = b.north - a.north;
  const double de = b.east - a.east;
  const double len2 = dn * dn + de * de;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.north - a.north) * dn + (p.east - a.east) * de) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  return std::hypot(p.north - (a.north + t * dn), p.east - (a.east + t * de));
}

}  // namespace detail

/// Simple polygon in the horizontal (north, east) plane.
class Polygon2D {
public:
  Polygon2D() = default;

  /// Throws InvalidArgument unless the vertices form a simple polygon with
  /// nonzero area.
  explicit Polygon2D(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3) throw InvalidArgument("polygon needs at least 3 vertices");
    for (const auto& v : vertices_)
      if (!std::isfinite(v.north) || !std::isfinite(v.east))
        throw InvalidArgument("polygon vertex is not finite");
    if (std::abs(signed_area()) <= 0.0) throw InvalidArgument("polygon has zero area");
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
        const Point2& a1 = vertices_[i];
        const Point2& a2 = vertices_[(i + 1) % n];
        const Point2& b1 = vertices_[j];
        const Point2& b2 = vertices_[(j + 1) % n];
        if (adjacent) {
          // Adjacent edges may only share their common vertex.
          if (a1 == a2 || b1 == b2) throw InvalidArgument("polygon has repeated vertex");
          const Point2& shared = (j == i + 1) ? a2 : a1;
          const Point2& a_other = (j == i + 1) ? a1 : a2;
          const Point2& b_other = (j == i + 1) ? b2 : b1;
          if (detail::orientation(a_other, shared, b_other) == 0 &&
              ((b_other.north - shared.north) * (a_other.north - shared.north) +
                   (b_other.east - shared.east) * (a_other.east - shared.east) >
               0.0))
            throw InvalidArgument("polygon edges overlap");
          continue;
        }
        if (detail::segments_intersect(a1, a2, b1, b2))
          throw InvalidArgument("polygon is self-intersecting");
      }
    }
  }

  const std::vector<Point2>& vertices() const noexcept { return vertices_; }

  double signed_area() const {
    double a = 0.0;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& p = vertices_[i];
      const Point2& q = vertices_[(i + 1) % n];
      a += p.north * q.east - q.north * p.east;
    }
    return 0.5 * a;
  }

  /// Distance from a point to the nearest polygon edge.
  double boundary_distance(double north_m, double east_m) const {
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i)
      best = std::min(best, detail::point_segment_distance_2d({north_m, east_m}, vertices_[i],
                                                              vertices_[(i + 1) % n]));
    return best;
  }

  bool operator==(const Polygon2D&) const = default;

private:
  std::vector<Point2> vertices_;
};

/// Even-odd ray casting. Points on an edge or vertex count as inside.
inline bool point_in_polygon(const Polygon2D& poly, double north_m, double east_m) {
  const auto& v = poly.vertices();
  const Point2 p{north_m, east_m};
  const std::size_t n = v.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = v[i];
    const Point2& b = v[j];
    if (detail::on_segment(p, a, b)) return true;
    if ((a.east > p.east) != (b.east > p.east)) {
      const double north_cross = a.north + (p.east - a.east) * (b.north - a.north) / (b.east - a.east);
      if (p.north < north_cross) inside = !inside;
    }
  }
  return inside;
}

/// Vertical extent in meters above the frame origin (height = -down).
/// An absent ceiling is unbounded.
struct AltitudeBand {
  double floor_m = 0.0;
  std::optional<double> ceiling_m;

  bool contains(double height_m) const {
    return height_m >= floor_m && (!ceiling_m || height_m <= *ceiling_m);
  }
  bool operator==(const AltitudeBand&) const = default;
};

// ---------------------------------------------------------------------------
// Wind
// ---------------------------------------------------------------------------

/// Direction is the bearing toward which the air moves, degrees clockwise
/// from north (0 = air moving north, 90 = air moving east).
struct WindField {
  double direction_deg = 0.0;
  double speed_mps = 0.0;
  double gust_amplitude_mps = 0.0;
  double gust_period_s = 10.0;

  bool operator==(const WindField&) const = default;
};

inline NedVelocity wind_at(const WindField& wind, double t_s) {
  double magnitude = wind.speed_mps;
  if (wind.gust_amplitude_mps > 0.0)
    magnitude += wind.gust_amplitude_mps * std::sin(2.0 * std::numbers::pi * t_s / wind.gust_period_s);
  const double dir = wind.direction_deg * std::numbers::pi / 180.0;
  return {magnitude * std::cos(dir), magnitude * std::sin(dir), 0.0};
}

// ---------------------------------------------------------------------------
// Terrain, obstacles, world
// ---------------------------------------------------------------------------

struct ObstacleBox {
  NedPosition center;
  Ned half_extents;

  bool contains(const NedPosition& p) const {
    return std::abs(p.north - center.north) <= half_extents.north &&
           std::abs(p.east - center.east) <= half_extents.east &&
           std::abs(p.down - center.down) <= half_extents.down;
  }

  /// Euclidean distance from a point to the closed box (0 inside).
  double distance_to(const NedPosition& p) const {
    const double dn = std::max(std::abs(p.north - center.north) - half_extents.north, 0.0);
    const double de = std::max(std::abs(p.east - center.east) - half_extents.east, 0.0);
    const double dd = std::max(std::abs(p.down - center.down) - half_extents.down, 0.0);
    return std::sqrt(dn * dn + de * de + dd * dd);
  }

  bool operator==(const ObstacleBox&) const = default;
};

struct HorizontalBounds {
  double north_min_m = 0.0;
  double north_max_m = 0.0;
  double east_min_m = 0.0;
  double east_max_m = 0.0;

  bool contains(double north_m, double east_m) const {
    return north_m >= north_min_m && north_m <= north_max_m && east_m >= east_min_m &&
           east_m <= east_max_m;
  }
  bool operator==(const HorizontalBounds&) const = default;
};

/// Regular elevation grid. Sample (row, col) sits at
/// (north_min + row * cell, east_min + col * cell) and holds the terrain
/// height in meters above the frame origin. Row-major, north-major.
struct Heightmap {
  double cell_size_m = 1.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  double north_min_m = 0.0;
  double east_min_m = 0.0;
  std::vector<double> samples;

  double at(std::size_t row, std::size_t col) const { return samples[row * cols + col]; }
  double north_max_m() const { return north_min_m + static_cast<double>(rows - 1) * cell_size_m; }
  double east_max_m() const { return east_min_m + static_cast<double>(cols - 1) * cell_size_m; }

  bool operator==(const Heightmap&) const = default;
};

struct WorldModel {
  std::string name;
  FrameOrigin frame;
  Heightmap heightmap;
  std::vector<ObstacleBox> obstacles;
  HorizontalBounds bounds;

  bool operator==(const WorldModel&) const = default;
};

namespace detail {
inline double bilinear(const Heightmap& hm, double r, double c) {
  const auto r0 = std::min(static_cast<std::size_t>(std::floor(r)), hm.rows - 2);
  const auto c0 = std::min(static_cast<std::size_t>(std::floor(c)), hm.cols - 2);
  const double fr = r - static_cast<double>(r0);
  const double fc = c - static_cast<double>(c0);
  const double south = (1.0 - fc) * hm.at(r0, c0) + fc * hm.at(r0, c0 + 1);
  const double north = (1.0 - fc) * hm.at(r0 + 1, c0) + fc * hm.at(r0 + 1, c0 + 1);
  return (1.0 - fr) * south + fr * north;
}
}  // namespace detail

/// Bilinear terrain height (meters above the frame origin). Throws
/// OutOfBounds outside the grid.
inline double terrain_elevation(const WorldModel& world, double north_m, double east_m) {
  const Heightmap& hm = world.heightmap;
  const double r = (north_m - hm.north_min_m) / hm.cell_size_m;
  const double c = (east_m - hm.east_min_m) / hm.cell_size_m;
  if (!(r >= 0.0 && c >= 0.0 && r <= static_cast<double>(hm.rows - 1) &&
        c <= static_cast<double>(hm.cols - 1)))
    throw OutOfBounds("terrain query (" + std::to_string(north_m) + ", " +
                      std::to_string(east_m) + ") is outside the heightmap");
  return detail::bilinear(hm, r, c);
}

/// Like terrain_elevation, but points outside the grid take the height of
/// the nearest grid edge.
inline double terrain_elevation_clamped(const WorldModel& world, double north_m, double east_m) {
  const Heightmap& hm = world.heightmap;
  const double r = std::clamp((north_m - hm.north_min_m) / hm.cell_size_m, 0.0,
                              static_cast<double>(hm.rows - 1));
  const double c = std::clamp((east_m - hm.east_min_m) / hm.cell_size_m, 0.0,
                              static_cast<double>(hm.cols - 1));
  return detail::bilinear(hm, r, c);
}

// ---------------------------------------------------------------------------
// Maps
// ---------------------------------------------------------------------------

/// Built-in flat map: 1 km x 1 km centered on the origin, terrain at 0 m,
/// and a 4 x 4 lattice of 20 m x 20 m x 30 m blocks centered at
/// north/east in {-300, -100, 100, 300}.
inline WorldModel blocks_map() {
  WorldModel w{"blocks", make_origin({47.641468, -122.140165, 122.0}), {}, {}, {}};
  w.bounds = {-500.0, 500.0, -500.0, 500.0};
  w.heightmap.cell_size_m = 1000.0;
  w.heightmap.rows = 2;
  w.heightmap.cols = 2;
  w.heightmap.north_min_m = -500.0;
  w.heightmap.east_min_m = -500.0;
  w.heightmap.samples.assign(4, 0.0);
  for (double n : {-300.0, -100.0, 100.0, 300.0})
    for (double e : {-300.0, -100.0, 100.0, 300.0})
      w.obstacles.push_back({{n, e, -15.0}, {10.0, 10.0, 15.0}});
  return w;
}

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw MapParseError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw MapParseError(path + "." + key, "missing required field");
  return *it;
}

inline double require_number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw MapParseError(path + "." + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw MapParseError(path + "." + key, "must be finite");
  return d;
}

inline void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                           const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; }))
      throw MapParseError(path + "." + it.key(), "unknown field");
  }
}

inline Ned parse_ned_object(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw MapParseError(path, "expected an object");
  reject_unknown(obj, {"north", "east", "down"}, path);
  return {require_number(obj, "north", path), require_number(obj, "east", path),
          require_number(obj, "down", path)};
}

}  // namespace detail

/// Parses and validates a map document (see docs/map_format.md).
inline WorldModel parse_map(const nlohmann::json& doc) {
  using detail::require;
  using detail::require_number;
  if (!doc.is_object()) throw MapParseError("$", "map document must be an object");
  detail::reject_unknown(doc, {"name", "origin", "heightmap", "obstacles", "bounds"}, "$");

  const auto& name = require(doc, "name", "$");
  if (!name.is_string() || name.get<std::string>().empty())
    throw MapParseError("$.name", "expected a non-empty string");

  const auto& o = require(doc, "origin", "$");
  if (!o.is_object()) throw MapParseError("$.origin", "expected an object");
  detail::reject_unknown(o, {"lat", "lon", "alt"}, "$.origin");
  GeodeticCoord origin{require_number(o, "lat", "$.origin"), require_number(o, "lon", "$.origin"),
                       require_number(o, "alt", "$.origin")};
  if (!is_valid(origin)) throw MapParseError("$.origin", "latitude/longitude out of range");
  std::optional<FrameOrigin> frame;
  try {
    frame = make_origin(origin);
  } catch (const PolarOrigin& e) {
    throw MapParseError("$.origin.lat", e.what());
  }

  const auto& b = require(doc, "bounds", "$");
  if (!b.is_object()) throw MapParseError("$.bounds", "expected an object");
  detail::reject_unknown(b, {"north_min", "north_max", "east_min", "east_max"}, "$.bounds");
  HorizontalBounds bounds{require_number(b, "north_min", "$.bounds"),
                          require_number(b, "north_max", "$.bounds"),
                          require_number(b, "east_min", "$.bounds"),
                          require_number(b, "east_max", "$.bounds")};
  if (!(bounds.north_min_m < bounds.north_max_m))
    throw MapParseError("$.bounds.north_max", "must exceed north_min");
  if (!(bounds.east_min_m < bounds.east_max_m))
    throw MapParseError("$.bounds.east_max", "must exceed east_min");

  const auto& h = require(doc, "heightmap", "$");
  if (!h.is_object()) throw MapParseError("$.heightmap", "expected an object");
  detail::reject_unknown(h, {"cell_size_m", "rows", "cols", "samples"}, "$.heightmap");
  Heightmap hm;
  hm.cell_size_m = require_number(h, "cell_size_m", "$.heightmap");
  if (!(hm.cell_size_m > 0.0)) throw MapParseError("$.heightmap.cell_size_m", "must be > 0");
  for (const char* key : {"rows", "cols"}) {
    const auto& v = require(h, key, "$.heightmap");
    if (!v.is_number_integer() || v.get<long long>() < 2)
      throw MapParseError(std::string("$.heightmap.") + key, "expected an integer >= 2");
  }
  hm.rows = h["rows"].get<std::size_t>();
  hm.cols = h["cols"].get<std::size_t>();
  const auto& s = require(h, "samples", "$.heightmap");
  if (!s.is_array() || s.size() != hm.rows * hm.cols)
    throw MapParseError("$.heightmap.samples", "expected an array of rows*cols numbers");
  hm.samples.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s[i].is_number() || !std::isfinite(s[i].get<double>()))
      throw MapParseError("$.heightmap.samples[" + std::to_string(i) + "]",
                          "expected a finite number");
    hm.samples.push_back(s[i].get<double>());
  }
  hm.north_min_m = bounds.north_min_m;
  hm.east_min_m = bounds.east_min_m;
  if (hm.north_max_m() < bounds.north_max_m || hm.east_max_m() < bounds.east_max_m)
    throw MapParseError("$.heightmap", "grid does not cover the map bounds");

  std::vector<ObstacleBox> obstacles;
  if (auto it = doc.find("obstacles"); it != doc.end()) {
    if (!it->is_array()) throw MapParseError("$.obstacles", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string path = "$.obstacles[" + std::to_string(i) + "]";
      const auto& ob = (*it)[i];
      if (!ob.is_object()) throw MapParseError(path, "expected an object");
      detail::reject_unknown(ob, {"center_ned", "half_extents"}, path);
      ObstacleBox box{detail::parse_ned_object(require(ob, "center_ned", path), path + ".center_ned"),
                      detail::parse_ned_object(require(ob, "half_extents", path),
                                               path + ".half_extents")};
      if (!(box.half_extents.north > 0 && box.half_extents.east > 0 && box.half_extents.down > 0))
        throw MapParseError(path + ".half_extents", "obstacle " + std::to_string(i) +
                                                        " half extents must be > 0");
      if (box.center.north - box.half_extents.north < bounds.north_min_m ||
          box.center.north + box.half_extents.north > bounds.north_max_m ||
          box.center.east - box.half_extents.east < bounds.east_min_m ||
          box.center.east + box.half_extents.east > bounds.east_max_m)
        throw MapParseError(path, "obstacle " + std::to_string(i) + " lies outside the map bounds");
      obstacles.push_back(box);
    }
  }
  return WorldModel{name.get<std::string>(), *frame, std::move(hm), std::move(obstacles), bounds};
}

inline nlohmann::json map_to_json(const WorldModel& w) {
  nlohmann::json obstacles = nlohmann::json::array();
  for (const auto& o : w.obstacles)
    obstacles.push_back(
        {{"center_ned", {{"north", o.center.north}, {"east", o.center.east}, {"down", o.center.down}}},
         {"half_extents",
          {{"north", o.half_extents.north}, {"east", o.half_extents.east}, {"down", o.half_extents.down}}}});
  const auto& org = w.frame.origin();
  return {{"name", w.name},
          {"origin", {{"lat", org.latitude_deg}, {"lon", org.longitude_deg}, {"alt", org.altitude_m}}},
          {"heightmap",
           {{"cell_size_m", w.heightmap.cell_size_m},
            {"rows", w.heightmap.rows},
            {"cols", w.heightmap.cols},
            {"samples", w.heightmap.samples}}},
          {"obstacles", obstacles},
          {"bounds",
           {{"north_min", w.bounds.north_min_m},
            {"north_max", w.bounds.north_max_m},
            {"east_min", w.bounds.east_min_m},
            {"east_max", w.bounds.east_max_m}}}};
}

/// "blocks" selects the built-in map; anything else is read as a map file.
/// Relative paths are tried against base_dir first when one is given.
inline WorldModel load_map(const std::string& ref, const std::filesystem::path& base_dir = {}) {
  if (ref == "blocks") return blocks_map();
  std::filesystem::path path(ref);
  if (path.is_relative() && !base_dir.empty() && std::filesystem::exists(base_dir / path)) path = base_dir / path;
  std::ifstream in(path);
  if (!in) throw UnknownMap("unknown map '" + ref + "' (not built in and not a readable file)");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw MapParseError("$", std::string("malformed JSON: ") + e.what());
  }
  return parse_map(doc);
}

}  // namespace skyrig
