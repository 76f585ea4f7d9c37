#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "skyrig/report.hpp"

using namespace skyrig;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SKYRIG_FIXTURES;

ScenarioSpec fixture(const std::string& name) {
  ParseResult pr = parse_scenario(read_text_file((kFixtures / "cli" / name).string()));
  EXPECT_TRUE(pr.ok());
  return *pr.spec;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("skyrig_report_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text_file(p.string()));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Report, PassingScenario) {
  const ScenarioSpec s = fixture("pass.json");
  const RunArtifacts art = run_simulation(s, blocks_map());
  const AcceptanceReport rep = build_report(art, s);
  EXPECT_TRUE(rep.all_passed());
  ASSERT_EQ(rep.property_results.size(), 3u);
  EXPECT_EQ(rep.property_results[0].property_id, "path");
  EXPECT_EQ(rep.property_results[0].threshold, 2.0);
  EXPECT_EQ(rep.run.termination, "completed");
  EXPECT_EQ(rep.run.seed, 7u);
  EXPECT_EQ(rep.run.uav_count, 1u);
}

TEST(Report, FailingSeparation) {
  const ScenarioSpec s = fixture("fail_separation.json");
  const AcceptanceReport rep = build_report(run_simulation(s, blocks_map()), s);
  EXPECT_FALSE(rep.all_passed());
  const PropertyResult& sep = rep.property_results[0];
  EXPECT_FALSE(sep.passed);
  EXPECT_EQ(sep.violation_count, 1u);
  EXPECT_NEAR(*sep.worst_value, 5.0, 1e-9);
  EXPECT_EQ(sep.threshold, 10.0);
  EXPECT_NE(sep.description.find("lead"), std::string::npos);
  EXPECT_TRUE(rep.property_results[1].passed);
}

TEST(Report, ManifestNamesPerUavSeries) {
  const ScenarioSpec s = fixture("reference.json");
  const RunArtifacts art = run_simulation(s, blocks_map());
  const AcceptanceReport rep = build_report(art, s);
  const fs::path dir = scratch("manifest");
  const auto files = write_outputs(rep, art, blocks_map(), dir);
  for (const char* f : {"report.json", "telemetry.csv", "sensors.csv", "deviation_uav0.csv", "deviation_uav1.csv",
                        "deviation_uav2.csv", "separation.csv"}) {
    EXPECT_NE(std::find(files.begin(), files.end(), f), files.end()) << f;
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const auto telemetry = read_csv(dir / "telemetry.csv");
  EXPECT_EQ(telemetry.size(), s.uavs.size() * art.ticks_executed + 1);
  EXPECT_EQ(telemetry[0], telemetry_columns());
  const auto sensors = read_csv(dir / "sensors.csv");
  EXPECT_EQ(sensors.size(), telemetry.size());
  EXPECT_EQ(nlohmann::json::parse(read_text_file((dir / "report.json").string())), report_to_json(rep));
  fs::remove_all(dir);
}

TEST(Report, JsonRoundTrip) {
  for (const char* name : {"pass.json", "fail_separation.json", "reference.json", "below_terrain.json"}) {
    const ScenarioSpec s = fixture(name);
    const WorldModel w = load_map(s.environment.map, kFixtures / "cli");
    const AcceptanceReport rep = build_report(run_simulation(s, w), s);
    const AcceptanceReport back = report_from_json(nlohmann::json::parse(dump_report(rep)));
    EXPECT_EQ(back, rep) << name;
    EXPECT_EQ(dump_report(back), dump_report(rep)) << name;
  }
}

TEST(ReportProperty, VerdictsMatchRecount) {
  std::mt19937_64 rng(91);
  const WorldModel w = blocks_map();
  std::size_t failing = 0;
  for (int i = 0; i < 20; ++i) {
    const ScenarioSpec s = oracle::random_scenario(rng);
    const RunArtifacts art = run_simulation(s, w);
    const AcceptanceReport rep = build_report(art, s);
    ASSERT_EQ(rep.property_results.size(), s.test_properties.size());
    bool all = true;
    for (std::size_t p = 0; p < s.test_properties.size(); ++p) {
      const auto& r = rep.property_results[p];
      const auto count = static_cast<std::size_t>(std::count_if(art.violations.begin(), art.violations.end(),
                                                 [&](const ViolationRecord& v) { return v.property_id == r.property_id; }));
      EXPECT_EQ(r.property_id, s.test_properties[p].id);
      EXPECT_EQ(r.violation_count, count);
      EXPECT_EQ(r.passed, count == 0);
      all = all && r.passed;
    }
    EXPECT_EQ(rep.all_passed(), all);
    failing += !all;
  }
  EXPECT_GT(failing, 0u);
}

TEST(ReportProperty, DeviationSeriesAgreesWithVerdict) {
  std::mt19937_64 rng(92);
  const WorldModel w = blocks_map();
  for (int i = 0; i < 10; ++i) {
    ScenarioSpec s = oracle::random_scenario(rng);
    for (auto& p : s.test_properties) p.scope.reset();
    const RunArtifacts art = run_simulation(s, w);
    const AcceptanceReport rep = build_report(art, s);
    const fs::path dir = scratch("series" + std::to_string(i));
    write_outputs(rep, art, w, dir);
    const double limit = std::get<MaxPathDeviation>(s.test_properties[0].kind).max_m;
    for (const auto& u : s.uavs) {
      const auto rows = read_csv(dir / ("deviation_" + u.id + ".csv"));
      double worst = 0;
      for (std::size_t r = 1; r < rows.size(); ++r) worst = std::max(worst, std::stod(rows[r][1]));
      const bool violated = std::any_of(art.violations.begin(), art.violations.end(), [&](const ViolationRecord& v) {
        return v.property_id == "dev" && v.uav_ids == std::vector<std::string>{u.id};
      });
      EXPECT_EQ(worst > limit, violated) << "case " << i << " " << u.id;
    }
    fs::remove_all(dir);
  }
}
