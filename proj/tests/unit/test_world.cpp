#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "skyrig/world.hpp"

using namespace skyrig;

namespace {

Polygon2D unit_square() { return Polygon2D({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

// L-shape with its notch in the north-east quadrant of [0,2]^2.
Polygon2D l_shape() { return Polygon2D({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}); }

// Star-shaped around the origin with every angular gap below pi, hence simple.
Polygon2D random_star(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> jitter(0, 0.4), rad(2, 10);
  std::vector<Point2> v;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2 * std::numbers::pi * (double(i) + jitter(rng)) / double(n);
    const double r = rad(rng);
    v.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return Polygon2D(v);
}

nlohmann::json valid_map_doc() {
  return nlohmann::json::parse(R"({
    "name": "hill",
    "origin": {"lat": 10, "lon": 20, "alt": 5},
    "heightmap": {"cell_size_m": 50, "rows": 3, "cols": 3, "samples": [0,0,0, 0,10,0, 0,0,0]},
    "obstacles": [{"center_ned": {"north": 0, "east": 0, "down": -5}, "half_extents": {"north": 2, "east": 2, "down": 5}}],
    "bounds": {"north_min": -50, "north_max": 50, "east_min": -50, "east_max": 50}
  })");
}

std::string map_error_path(const nlohmann::json& doc) {
  try {
    parse_map(doc);
  } catch (const MapParseError& e) {
    return e.path();
  }
  return "<accepted>";
}

}  // namespace

TEST(Wind, Examples) {
  const NedVelocity calm = wind_at({123, 0, 0, 10}, 3.7);
  EXPECT_EQ(calm.north, 0.0);
  EXPECT_EQ(calm.east, 0.0);
  const NedVelocity east = wind_at({90, 5, 0, 10}, 0.0);
  EXPECT_NEAR(east.north, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(east.east, 5.0);
  const NedVelocity gust = wind_at({0, 5, 2, 8}, 2.0);
  EXPECT_DOUBLE_EQ(gust.north, 7.0);
  EXPECT_EQ(gust.east, 0.0);
}

TEST(WindProperty, PeriodicAndLevel) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dir(0, 360), spd(0, 20), amp(0, 5), per(1, 30), t(0, 500);
  for (int i = 0; i < 2000; ++i) {
    const WindField w{dir(rng), spd(rng), i % 3 ? amp(rng) : 0.0, per(rng)};
    const double tt = t(rng);
    const NedVelocity a = wind_at(w, tt);
    const NedVelocity b = wind_at(w, tt + w.gust_period_s);
    EXPECT_EQ(a.down, 0.0);
    EXPECT_NEAR(a.north, b.north, 1e-9);
    EXPECT_NEAR(a.east, b.east, 1e-9);
    if (w.gust_amplitude_mps == 0.0) {
      const NedVelocity c = wind_at(w, 0.0);
      EXPECT_EQ(a.north, c.north);
      EXPECT_EQ(a.east, c.east);
    }
  }
}

TEST(Polygon, UnitSquare) {
  const Polygon2D sq = unit_square();
  EXPECT_TRUE(point_in_polygon(sq, 0.5, 0.5));
  EXPECT_FALSE(point_in_polygon(sq, 2, 2));
  EXPECT_TRUE(point_in_polygon(sq, 1.0, 0.5));
  EXPECT_TRUE(point_in_polygon(sq, 0.0, 0.0));
}

TEST(Polygon, LShapeNotchAgreesWithRaster) {
  const Polygon2D l = l_shape();
  EXPECT_FALSE(point_in_polygon(l, 1.5, 1.5));
  EXPECT_FALSE(oracle::winding_inside(l, 1.5, 1.5));
  EXPECT_TRUE(point_in_polygon(l, 0.5, 1.5));
  EXPECT_TRUE(oracle::winding_inside(l, 0.5, 1.5));
}

TEST(Polygon, RejectsInvalid) {
  EXPECT_THROW(Polygon2D({{0, 0}, {1, 0}}), InvalidArgument);
  EXPECT_THROW(Polygon2D({{0, 0}, {1, 0}, {2, 0}}), InvalidArgument);
  EXPECT_THROW(Polygon2D({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), InvalidArgument);
}

TEST(PolygonProperty, RasterAgreement) {
  std::mt19937_64 rng(22);
  const double cell = 0.05;
  std::size_t total = 0, agree = 0;
  for (int k = 0; k < 20; ++k) {
    const Polygon2D poly = random_star(rng, 3 + rng() % 10);
    for (double n = -10.5; n <= 10.5; n += 0.37) {
      for (double e = -10.5; e <= 10.5; e += 0.41) {
        ++total;
        const bool a = point_in_polygon(poly, n, e);
        const bool b = oracle::winding_inside(poly, n, e);
        if (a == b) {
          ++agree;
        } else {
          EXPECT_LE(poly.boundary_distance(n, e), cell) << n << "," << e;
        }
      }
    }
  }
  EXPECT_GE(double(agree) / double(total), 0.999);
}

TEST(Blocks, DocumentedLayoutAndDeterministic) {
  const WorldModel a = blocks_map();
  const WorldModel b = load_map("blocks");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.obstacles.size(), 16u);
  EXPECT_EQ(a.bounds.north_max_m - a.bounds.north_min_m, 1000.0);
  EXPECT_EQ(a.bounds.east_max_m - a.bounds.east_min_m, 1000.0);
  for (const auto& o : a.obstacles) {
    EXPECT_EQ(o.half_extents.north, 10.0);
    EXPECT_TRUE(o.contains(o.center));
  }
  EXPECT_EQ(terrain_elevation(a, 499, -499), 0.0);
}

TEST(MapFile, ParsesAndRoundTrips) {
  const WorldModel w = parse_map(valid_map_doc());
  EXPECT_EQ(w.name, "hill");
  EXPECT_DOUBLE_EQ(terrain_elevation(w, 0, 0), 10.0);
  EXPECT_DOUBLE_EQ(terrain_elevation(w, 25, 0), 5.0);
  EXPECT_EQ(parse_map(map_to_json(w)), w);

  const auto path = std::filesystem::temp_directory_path() / "skyrig_test_map.json";
  std::ofstream(path) << valid_map_doc().dump();
  EXPECT_EQ(load_map(path.string()), w);
  std::filesystem::remove(path);
}

TEST(MapFile, Errors) {
  EXPECT_THROW(load_map("no_such_map_anywhere"), UnknownMap);

  auto doc = valid_map_doc();
  doc["heightmap"]["cell_size_m"] = 0;
  EXPECT_EQ(map_error_path(doc), "$.heightmap.cell_size_m");

  doc = valid_map_doc();
  doc["obstacles"].push_back(doc["obstacles"][0]);
  doc["obstacles"][1]["center_ned"]["north"] = 49;
  EXPECT_EQ(map_error_path(doc), "$.obstacles[1]");
  try {
    parse_map(doc);
  } catch (const MapParseError& e) {
    EXPECT_NE(std::string(e.what()).find("obstacle 1"), std::string::npos);
  }

  doc = valid_map_doc();
  doc["heightmap"]["samples"][4] = "x";
  EXPECT_EQ(map_error_path(doc), "$.heightmap.samples[4]");

  doc = valid_map_doc();
  doc["colour"] = 1;
  EXPECT_EQ(map_error_path(doc), "$.colour");
}
