#include <gtest/gtest.h>

#include <random>

#include "skyrig/mission.hpp"

using namespace skyrig;

namespace {

MissionPlan plan_of(std::vector<Ned> pts, bool land_after = true, double radius = 1.0) {
  MissionPlan p;
  for (const auto& q : pts) p.waypoints.push_back({q, radius});
  p.land_after = land_after;
  return p;
}

}  // namespace

TEST(Controller, ClampedCommand) {
  const Command c = compute_command({0, 0, 0}, plan_of({{10, 0, 0}}), 0, {1.0, 5.0, 2.0});
  EXPECT_DOUBLE_EQ(c.velocity.north, 5.0);
  EXPECT_EQ(c.velocity.east, 0.0);
  EXPECT_EQ(c.velocity.down, 0.0);
  EXPECT_EQ(c.active_idx, 0u);
  EXPECT_FALSE(c.request_landing);
}

TEST(Controller, CaptureAdvances) {
  const MissionPlan p = plan_of({{10, 0, 0}, {10, 10, 0}});
  const Command c = compute_command({9.5, 0, 0}, p, 0, {1.0, 5.0, 2.0});
  EXPECT_EQ(c.active_idx, 1u);
  EXPECT_NEAR(c.velocity.norm(), 5.0, 1e-12);
  EXPECT_NEAR(c.velocity.east / c.velocity.north, 10.0 / 0.5, 1e-9);
}

TEST(Controller, LandsAfterLast) {
  const MissionPlan p = plan_of({{10, 0, 0}});
  const Command c = compute_command({10, 0, 0}, p, 0, {});
  EXPECT_EQ(c.active_idx, 1u);
  EXPECT_TRUE(c.request_landing);
  EXPECT_EQ(c.velocity, (Ned{0, 0, 2.0}));
}

TEST(Controller, HoldsWithoutLanding) {
  const MissionPlan p = plan_of({{10, 0, 0}}, false);
  const Command c = compute_command({11, 0, 0}, p, 1, {1.0, 5.0, 2.0});
  EXPECT_FALSE(c.request_landing);
  EXPECT_DOUBLE_EQ(c.velocity.north, -1.0);
}

TEST(Segment, Definition) {
  const MissionPlan p = plan_of({{10, 0, 0}, {10, 10, 0}, {0, 10, 0}});
  EXPECT_EQ(active_segment(p, {0, 0, 0}, 0), (Segment{{0, 0, 0}, {10, 0, 0}}));
  EXPECT_EQ(active_segment(p, {0, 0, 0}, 2), (Segment{{10, 10, 0}, {0, 10, 0}}));
  EXPECT_EQ(active_segment(p, {0, 0, 0}, 3), (Segment{{0, 10, 0}, {0, 10, 0}}));
}

TEST(ControllerProperty, MagnitudeClampAndMonotoneCursor) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-100, 100), g(0.1, 5), m(0.5, 20), r(0.2, 10);
  for (int i = 0; i < 5000; ++i) {
    std::vector<Ned> pts;
    for (std::size_t k = 0; k < 1 + rng() % 4; ++k) pts.push_back({u(rng), u(rng), u(rng)});
    const MissionPlan p = plan_of(pts, rng() % 2, r(rng));
    const ControllerParams cp{g(rng), m(rng), 2.0};
    const std::size_t idx = rng() % (pts.size() + 1);
    const Command c = compute_command({u(rng), u(rng), u(rng)}, p, idx, cp);
    EXPECT_LE(c.velocity.norm(), std::max(cp.max_speed_mps, cp.descent_speed_mps) * (1 + 1e-12));
    EXPECT_GE(c.active_idx, idx);
    EXPECT_LE(c.active_idx, idx + 1);
  }
}

TEST(ClampProperty, PreservesDirection) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-50, 50), m(0.1, 30);
  for (int i = 0; i < 5000; ++i) {
    const Ned v{u(rng), u(rng), u(rng)};
    const double lim = m(rng);
    const Ned c = clamp_magnitude(v, lim);
    EXPECT_LE(c.norm(), lim * (1 + 1e-12));
    if (v.norm() <= lim) EXPECT_EQ(c, v);
    else EXPECT_NEAR(c.dot(v) / (c.norm() * v.norm()), 1.0, 1e-12);
  }
}
