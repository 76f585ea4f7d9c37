#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "skyrig/scenario.hpp"

using namespace skyrig;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SKYRIG_FIXTURES;

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(read_text_file(p.string())); }

std::vector<std::string> error_paths(const std::vector<Diagnostic>& diags) {
  std::vector<std::string> out;
  for (const auto& d : diags)
    if (d.is_error()) out.push_back(d.path);
  return out;
}

// Errors from parsing, or from validation against the map once parsing succeeds.
std::vector<Diagnostic> all_errors(const std::string& text) {
  ParseResult pr = parse_scenario(text);
  if (!pr.ok()) return pr.errors;
  return validate_semantics(*pr.spec, load_map(pr.spec->environment.map));
}

// Resolves a diagnostic path such as "uavs[0].plan.waypoints[1]" inside doc.
bool path_exists(const nlohmann::json& doc, const std::string& path) {
  if (path == "$") return true;
  const nlohmann::json* cur = &doc;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '.') ++i;
    if (path[i] == '[') {
      const std::size_t close = path.find(']', i);
      const std::size_t idx = std::stoul(path.substr(i + 1, close - i - 1));
      if (!cur->is_array() || idx >= cur->size()) return false;
      cur = &(*cur)[idx];
      i = close + 1;
      continue;
    }
    const std::size_t end = path.find_first_of(".[", i);
    const std::string key = path.substr(i, end == std::string::npos ? std::string::npos : end - i);
    if (!cur->is_object() || !cur->contains(key)) return false;
    cur = &(*cur)[key];
    i = end == std::string::npos ? path.size() : end;
  }
  return true;
}

ScenarioSpec random_spec(std::mt19937_64& rng) {
  ScenarioSpec s = oracle::random_scenario(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < 0.5) s.environment.origin = GeodeticCoord{-60 + 120 * unit(rng), -180 + 360 * unit(rng), 500 * unit(rng)};
  s.environment.time_of_day = fmt::format("{:02}:{:02}", rng() % 24, rng() % 60);
  for (auto& u : s.uavs) {
    if (unit(rng) < 0.3) u.home = GeodeticCoord{47.641468 + 1e-4 * unit(rng), -122.140165 + 1e-4 * unit(rng), 122.0};
    if (unit(rng) < 0.3) u.sensors.declared_unsupported = {"camera"};
    u.sensors.barometer.enabled = unit(rng) < 0.8;
    u.sensors.magnetometer.noise_std_deg = 3 * unit(rng);
    u.vehicle.descent_speed_mps = 0.5 + 3 * unit(rng);
  }
  return s;
}

}  // namespace

TEST(Scenario, MinimalGoldenFillsDefaults) {
  const ParseResult pr = parse_scenario(read_text_file((kFixtures / "valid/minimal.json").string()));
  ASSERT_TRUE(pr.ok());
  EXPECT_EQ(scenario_to_json(*pr.spec), load_json(kFixtures / "valid/minimal.expected.json"));
  EXPECT_EQ(pr.spec->sim.dt_s, 0.02);
  EXPECT_EQ(pr.spec->uavs[0].vehicle.max_speed_mps, 10.0);
  EXPECT_EQ(pr.spec->uavs[0].plan.waypoints[0].capture_radius_m, 1.0);
}

TEST(Scenario, NegativeWindSpeed) {
  nlohmann::json doc = load_json(kFixtures / "valid/minimal.json");
  doc["environment"]["wind"] = {{"speed_mps", -3}};
  const ParseResult pr = parse_scenario_json(doc);
  ASSERT_FALSE(pr.ok());
  EXPECT_EQ(error_paths(pr.errors), std::vector<std::string>{"environment.wind.speed_mps"});
}

TEST(Scenario, UnknownKeyNamed) {
  nlohmann::json doc = load_json(kFixtures / "valid/minimal.json");
  doc["environment"]["windspeed"] = 4;
  const ParseResult pr = parse_scenario_json(doc);
  ASSERT_FALSE(pr.ok());
  ASSERT_EQ(pr.errors.size(), 1u);
  EXPECT_EQ(pr.errors[0].path, "environment.windspeed");
  EXPECT_NE(pr.errors[0].message.find("windspeed"), std::string::npos);
}

TEST(Scenario, WindDirectionNormalized) {
  const ParseResult pr = parse_scenario(read_text_file((kFixtures / "valid/full.json").string()));
  ASSERT_TRUE(pr.ok());
  EXPECT_DOUBLE_EQ(pr.spec->environment.wind.direction_deg, 330.0);
  ASSERT_EQ(pr.spec->test_properties.size(), 6u);
  EXPECT_FALSE(std::get<NoFlyZone>(pr.spec->test_properties[5].kind).band.ceiling_m.has_value());
}

TEST(Scenario, InvalidCorpusReportsExpectedPath) {
  const nlohmann::json expected = load_json(kFixtures / "invalid/expected_paths.json");
  ASSERT_GE(expected.size(), 20u);
  for (const auto& [file, path] : expected.items()) {
    const std::string text = read_text_file((kFixtures / "invalid" / file).string());
    const auto paths = error_paths(all_errors(text));
    EXPECT_NE(std::find(paths.begin(), paths.end(), path.get<std::string>()), paths.end())
        << file << ": expected an error at " << path;
    // The reported path points into the document, unless it names the missing key.
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
      continue;
    }
    for (const auto& p : paths) {
      const std::size_t cut = p.find_last_of(".[");
      const std::string parent = cut == std::string::npos ? "$" : p.substr(0, cut);
      EXPECT_TRUE(path_exists(doc, p) || path_exists(doc, parent)) << file << ": " << p;
    }
  }
}

TEST(Scenario, SemanticExamples) {
  nlohmann::json doc = load_json(kFixtures / "valid/minimal.json");
  const WorldModel world = blocks_map();

  doc["uavs"][0]["home"] = {{"north", 100}, {"east", 100}, {"down", -15}};
  ParseResult pr = parse_scenario_json(doc);
  ASSERT_TRUE(pr.ok());
  EXPECT_EQ(error_paths(validate_semantics(*pr.spec, world)), std::vector<std::string>{"uavs[0].home"});

  doc = load_json(kFixtures / "valid/minimal.json");
  doc["uavs"][0]["plan"]["waypoints"][0]["position"]["down"] = 10;
  pr = parse_scenario_json(doc);
  const auto diags = validate_semantics(*pr.spec, world);
  EXPECT_FALSE(has_errors(diags));
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].severity, Diagnostic::Severity::Warning);
  EXPECT_EQ(diags[0].path, "uavs[0].plan.waypoints[0].position");

  doc = load_json(kFixtures / "valid/minimal.json");
  doc["uavs"].push_back(doc["uavs"][0]);
  pr = parse_scenario_json(doc);
  EXPECT_EQ(error_paths(validate_semantics(*pr.spec, world)), std::vector<std::string>{"uavs[1].id"});
}

TEST(Scenario, ValidCorpusParses) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(kFixtures / "valid")) {
    if (entry.path().string().find(".expected.") != std::string::npos) continue;
    const ParseResult pr = parse_scenario(read_text_file(entry.path().string()));
    ASSERT_TRUE(pr.ok()) << entry.path();
    const WorldModel world = load_map(pr.spec->environment.map, entry.path().parent_path());
    EXPECT_FALSE(has_errors(validate_semantics(*pr.spec, world))) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 5u);
}

TEST(ScenarioProperty, RoundTripFixedPointOnCorpus) {
  for (const auto& entry : fs::directory_iterator(kFixtures / "valid")) {
    if (entry.path().string().find(".expected.") != std::string::npos) continue;
    const ParseResult first = parse_scenario(read_text_file(entry.path().string()));
    ASSERT_TRUE(first.ok());
    const std::string text = scenario_to_json(*first.spec).dump(2);
    const ParseResult second = parse_scenario(text);
    ASSERT_TRUE(second.ok()) << entry.path();
    EXPECT_EQ(*first.spec, *second.spec) << entry.path();
    EXPECT_EQ(scenario_to_json(*second.spec).dump(2), text);
  }
}

TEST(ScenarioProperty, RoundTripFixedPointOnRandomSpecs) {
  std::mt19937_64 rng(71);
  for (int i = 0; i < 300; ++i) {
    const ScenarioSpec s = random_spec(rng);
    const ParseResult pr = parse_scenario(scenario_to_json(s).dump());
    ASSERT_TRUE(pr.ok()) << (pr.errors.empty() ? "" : pr.errors[0].to_string());
    EXPECT_EQ(*pr.spec, s) << "case " << i;
  }
}

TEST(ScenarioProperty, SingleFieldCorruptionNamesThatField) {
  // Replace one numeric leaf of a valid document with a string; the parser
  // reports exactly that leaf.
  const nlohmann::json base = scenario_to_json(*parse_scenario(read_text_file((kFixtures / "valid/full.json").string())).spec);
  std::vector<nlohmann::json::json_pointer> leaves;
  const nlohmann::json flat = base.flatten();
  for (const auto& [ptr, v] : flat.items())
    if (v.is_number() && ptr.find("/polygon/") == std::string::npos) leaves.emplace_back(ptr);
  ASSERT_GT(leaves.size(), 30u);
  for (const auto& ptr : leaves) {
    nlohmann::json doc = base;
    doc[ptr] = "oops";
    const ParseResult pr = parse_scenario_json(doc);
    ASSERT_FALSE(pr.ok()) << ptr.to_string();
    std::string path;
    std::string rest = ptr.to_string();
    std::size_t pos = 1;
    while (pos <= rest.size()) {
      const std::size_t next = rest.find('/', pos);
      const std::string tok = rest.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
      if (!tok.empty() && std::all_of(tok.begin(), tok.end(), ::isdigit))
        path += "[" + tok + "]";
      else
        path += (path.empty() ? "" : ".") + tok;
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    EXPECT_EQ(error_paths(pr.errors), std::vector<std::string>{path}) << ptr.to_string();
  }
}
