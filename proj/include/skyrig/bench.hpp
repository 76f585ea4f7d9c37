#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "skyrig/engine.hpp"
#include "skyrig/report.hpp"
#include "skyrig/scenario.hpp"
#include "skyrig/world.hpp"

namespace skyrig {

/// Fleet of n UAVs over the blocks map. UAV i starts at lattice cell
/// (i / 5, i % 5) with 20 m spacing around the origin and flies a 120 m
/// square loop at 40 + 2i m above ground (clear of the 30 m blocks),
/// without landing, so a run lasts exactly duration_s.
inline ScenarioSpec bench_scenario(std::size_t n_uavs, double duration_s, double dt_s) {
  ScenarioSpec s;
  s.environment.map = "blocks";
  s.environment.wind = {45.0, 3.0, 1.0, 8.0};
  s.sim = {dt_s, duration_s, 1};
  for (std::size_t i = 0; i < n_uavs; ++i) {
    UavSpec u;
    u.id = fmt::format("uav{}", i);
    const double north = -40.0 + 20.0 * static_cast<double>(i / 5);
    const double east = -40.0 + 20.0 * static_cast<double>(i % 5);
    const double down = -(40.0 + 2.0 * static_cast<double>(i));
    u.home = NedPosition{north, east, 0.0};
    u.sensors.gps.noise_std_m = 0.5;
    u.plan.land_after = false;
    const double side = 120.0;
    const std::vector<std::pair<double, double>> loop{{0, 0}, {side, 0}, {side, side}, {0, side}};
    u.plan.waypoints.push_back({NedPosition{north, east, down}, 2.0});
    for (int lap = 0; lap < 4; ++lap)
      for (std::size_t k = 1; k <= loop.size(); ++k) {
        const auto& [dn, de] = loop[k % loop.size()];
        u.plan.waypoints.push_back({NedPosition{north + dn, east + de, down}, 2.0});
      }
    s.uavs.push_back(std::move(u));
  }
  s.test_properties.push_back({"deviation", std::nullopt, MaxPathDeviation{10.0}});
  s.test_properties.push_back({"separation", std::nullopt, MinSeparation{1.0}});
  s.test_properties.push_back({"collision", std::nullopt, NoCollision{}});
  return s;
}

struct BenchResult {
  std::size_t uavs = 0;
  std::size_t ticks = 0;
  double dt_s = 0.0;
  std::vector<double> tick_ms;
  double wall_s = 0.0;
  double mean_tick_ms = 0.0;
  double median_tick_ms = 0.0;
  double p95_tick_ms = 0.0;
  double ticks_per_s = 0.0;
  double realtime_factor = 0.0;  // simulated seconds per wall second
};

inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) ;
  return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
}

inline BenchResult run_bench(std::size_t n_uavs, double duration_s, double dt_s) {
  const ScenarioSpec spec = bench_scenario(n_uavs, duration_s, dt_s);
  const WorldModel world = blocks_map();
  BenchResult r;
  r.uavs = n_uavs;
  r.dt_s = dt_s;
  using clock = std::chrono::steady_clock;
  auto last = clock::now();
  const auto start = last;
  RunOptions opts;
  opts.on_tick = [&](std::size_t) {
    const auto now = clock::now();
    r.tick_ms.push_back(std::chrono::duration<double, std::milli>(now - last).count());
    last = now;
  };
  const RunArtifacts art = run_simulation(spec, world, opts);
  r.wall_s = std::chrono::duration<double>(clock::now() - start).count();
  r.ticks = art.ticks_executed;
  r.mean_tick_ms = std::accumulate(r.tick_ms.begin(), r.tick_ms.end(), 0.0) / static_cast<double>(r.tick_ms.size());
  r.median_tick_ms = percentile(r.tick_ms, 0.5);
  r.p95_tick_ms = percentile(r.tick_ms, 0.95);
  r.ticks_per_s = static_cast<double>(r.ticks) / r.wall_s;
  r.realtime_factor = static_cast<double>(r.ticks) * dt_s / r.wall_s;
  return r;
}

inline std::string bench_ticks_csv(const BenchResult& r) {
  std::string out = "tick,wall_ms\n";
  for (std::size_t i = 0; i < r.tick_ms.size(); ++i) out += fmt::format("{},{}\n", i + 1, r.tick_ms[i]);
  return out;
}

inline std::string bench_summary_csv(const BenchResult& r) {
  return fmt::format(
      "uavs,ticks,dt_s,wall_s,mean_tick_ms,median_tick_ms,p95_tick_ms,ticks_per_s,realtime_factor\n"
      "{},{},{},{},{},{},{},{},{}\n",
      r.uavs, r.ticks, r.dt_s, r.wall_s, r.mean_tick_ms, r.median_tick_ms, r.p95_tick_ms, r.ticks_per_s,
      r.realtime_factor);
}

}  // namespace skyrig
