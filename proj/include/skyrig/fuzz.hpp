#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "skyrig/engine.hpp"
#include "skyrig/error.hpp"
#include "skyrig/report.hpp"
#include "skyrig/rng.hpp"
#include "skyrig/scenario.hpp"

namespace skyrig {

inline constexpr int kCampaignFormatVersion = 1;

struct FuzzParameter {
  std::string target;
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const FuzzParameter&) const = default;
};

struct FuzzSpec {
  std::vector<FuzzParameter> parameters;
  std::size_t n_variants = 1;
  std::uint64_t campaign_seed = 0;
  bool operator==(const FuzzSpec&) const = default;
};

struct Assignment {
  std::string target;
  double value = 0.0;
  bool operator==(const Assignment&) const = default;
};

struct EnvVariant {
  std::size_t index = 0;
  std::vector<Assignment> assignments;
  std::uint64_t run_seed = 0;
  bool operator==(const EnvVariant&) const = default;
};

/// A parsed fuzz target: which field, which UAVs (for sensor fields), and
/// the field's own lower bound.
struct FuzzTarget {
  enum class Field {
    WindDirection,
    WindSpeed,
    WindGustAmplitude,
    WindGustPeriod,
    GpsNoise,
    GpsRate,
    BaroNoise,
    MagNoise
  };
  Field field;
  std::optional<std::size_t> uav_index;  // nullopt = every UAV
  double min_value = 0.0;
  bool min_exclusive = false;
  bool unbounded = false;
};

/// Accepted targets: wind.{direction_deg,speed_mps,gust_amplitude_mps,
/// gust_period_s} (optionally prefixed "environment.") and
/// uav[*|N].sensors.{gps.noise_std_m,gps.update_hz,barometer.noise_std_m,
/// magnetometer.noise_std_deg}.
inline FuzzTarget parse_target(const std::string& target) {
  using F = FuzzTarget::Field;
  std::string t = target;
  if (t.rfind("environment.", 0) == 0) t = t.substr(12);
  if (t == "wind.direction_deg") return {F::WindDirection, std::nullopt, 0.0, false, true};
  if (t == "wind.speed_mps") return {F::WindSpeed, std::nullopt, 0.0, false, false};
  if (t == "wind.gust_amplitude_mps") return {F::WindGustAmplitude, std::nullopt, 0.0, false, false};
  if (t == "wind.gust_period_s") return {F::WindGustPeriod, std::nullopt, 0.0, true, false};
  static const std::regex uav_re(R"(uavs?\[(\*|\d+)\]\.sensors\.(gps\.noise_std_m|gps\.update_hz|barometer\.noise_std_m|magnetometer\.noise_std_deg))");
  std::smatch m;
  if (std::regex_match(t, m, uav_re)) {
    std::optional<std::size_t> idx;
    if (m[1] != "*") idx = static_cast<std::size_t>(std::stoull(m[1].str()));
    const std::string field = m[2];
    if (field == "gps.noise_std_m") return {F::GpsNoise, idx, 0.0, false, false};
    if (field == "gps.update_hz") return {F::GpsRate, idx, 0.0, true, false};
    if (field == "barometer.noise_std_m") return {F::BaroNoise, idx, 0.0, false, false};
    return {F::MagNoise, idx, 0.0, false, false};
  }
  throw InvalidArgument("unknown fuzz target '" + target + "'");
}

inline void check_parameter(const FuzzParameter& p) {
  const FuzzTarget t = parse_target(p.target);
  if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || p.lo > p.hi)
    throw InvalidRange("range for '" + p.target + "' must satisfy lo <= hi");
  if (t.unbounded) return;
  if (t.min_exclusive ? !(p.lo > t.min_value) : !(p.lo >= t.min_value))
    throw InvalidRange("range for '" + p.target + "' must have lo " + (t.min_exclusive ? "> " : ">= ") +
                       fmt::format("{}", t.min_value));
}

inline FuzzSpec parse_fuzz_spec(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("campaign spec must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "parameters" && it.key() != "n_variants" && it.key() != "campaign_seed")
      throw InvalidArgument("campaign spec: unknown field '" + it.key() + "'");
  FuzzSpec spec;
  if (!j.contains("parameters") || !j["parameters"].is_array() || j["parameters"].empty())
    throw InvalidArgument("campaign spec: parameters must be a non-empty array");
  for (std::size_t i = 0; i < j["parameters"].size(); ++i) {
    const auto& p = j["parameters"][i];
    const std::string path = "parameters[" + std::to_string(i) + "]";
    if (!p.is_object() || !p.contains("target") || !p["target"].is_string() || !p.contains("range") ||
        !p["range"].is_array() || p["range"].size() != 2 || !p["range"][0].is_number() || !p["range"][1].is_number() ||
        p.size() != 2)
      throw InvalidArgument("campaign spec: " + path + " must be {\"target\": string, \"range\": [lo, hi]}");
    FuzzParameter fp{p["target"].get<std::string>(), p["range"][0].get<double>(), p["range"][1].get<double>()};
    check_parameter(fp);
    spec.parameters.push_back(fp);
  }
  if (!j.contains("n_variants") || !j["n_variants"].is_number_unsigned() || j["n_variants"].get<std::size_t>() < 1)
    throw InvalidArgument("campaign spec: n_variants must be an integer >= 1");
  spec.n_variants = j["n_variants"].get<std::size_t>();
  if (j.contains("campaign_seed")) {
    if (!j["campaign_seed"].is_number_unsigned())
      throw InvalidArgument("campaign spec: campaign_seed must be a non-negative integer");
    spec.campaign_seed = j["campaign_seed"].get<std::uint64_t>();
  }
  return spec;
}

inline nlohmann::json fuzz_spec_to_json(const FuzzSpec& spec) {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : spec.parameters) params.push_back({{"target", p.target}, {"range", {p.lo, p.hi}}});
  return {{"parameters", params}, {"n_variants", spec.n_variants}, {"campaign_seed", spec.campaign_seed}};
}

/// Variant 0 takes every lower bound, variant 1 every upper bound; the rest
/// sample each range uniformly from a stream keyed by the variant index.
inline std::vector<EnvVariant> generate_variants(const FuzzSpec& spec) {
  for (const auto& p : spec.parameters) check_parameter(p);
  std::vector<EnvVariant> out;
  out.reserve(spec.n_variants);
  for (std::size_t i = 0; i < spec.n_variants; ++i) {
    EnvVariant v;
    v.index = i;
    v.run_seed = derive_seed(spec.campaign_seed, i, SensorKind::None, StreamPurpose::RunSeed);
    RngStream rng = derive_rng_stream(spec.campaign_seed, i, SensorKind::None, StreamPurpose::FuzzSampling);
    for (const auto& p : spec.parameters) {
      double value;
      if (i == 0) {
        value = p.lo;
      } else if (i == 1) {
        value = p.hi;
      } else {
        std::uniform_real_distribution<double> dist(p.lo, p.hi);
        value = std::clamp(dist(rng), p.lo, p.hi);
      }
      v.assignments.push_back({p.target, value});
    }
    out.push_back(std::move(v));
  }
  return out;
}

/// Copy of base with the variant's assignments and run seed applied.
inline ScenarioSpec apply_variant(const ScenarioSpec& base, const EnvVariant& v) {
  using F = FuzzTarget::Field;
  ScenarioSpec s = base;
  s.sim.seed = v.run_seed;
  for (const auto& a : v.assignments) {
    const FuzzTarget t = parse_target(a.target);
    auto& wind = s.environment.wind;
    switch (t.field) {
      case F::WindDirection: wind.direction_deg = normalize_heading(a.value); continue;
      case F::WindSpeed: wind.speed_mps = a.value; continue;
      case F::WindGustAmplitude: wind.gust_amplitude_mps = a.value; continue;
      case F::WindGustPeriod: wind.gust_period_s = a.value; continue;
      default: break;
    }
    if (t.uav_index && *t.uav_index >= s.uavs.size())
      throw InvalidArgument("fuzz target '" + a.target + "' names a UAV index beyond the fleet");
    for (std::size_t i = 0; i < s.uavs.size(); ++i) {
      if (t.uav_index && *t.uav_index != i) continue;
      auto& sensors = s.uavs[i].sensors;
      switch (t.field) {
        case F::GpsNoise: sensors.gps.noise_std_m = a.value; break;
        case F::GpsRate: sensors.gps.update_hz = a.value; break;
        case F::BaroNoise: sensors.barometer.noise_std_m = a.value; break;
        case F::MagNoise: sensors.magnetometer.noise_std_deg = a.value; break;
        default: break;
      }
    }
  }
  return s;
}

enum class VariantVerdict { AllPass, Violated, Error };

inline std::string_view to_string(VariantVerdict v) {
  switch (v) {
    case VariantVerdict::AllPass: return "all_pass";
    case VariantVerdict::Violated: return "violated";
    case VariantVerdict::Error: return "error";
  }
  return "unknown";
}

struct VariantResult {
  EnvVariant variant;
  VariantVerdict verdict = VariantVerdict::AllPass;
  std::vector<std::string> violated_properties;
  std::string error;
  std::string report_dir;
};

struct CampaignReport {
  ScenarioSpec base;
  FuzzSpec spec;
  std::vector<VariantResult> variants;

  bool any_violated() const {
    return std::any_of(variants.begin(), variants.end(),
                       [](const VariantResult& v) { return v.verdict == VariantVerdict::Violated; });
  }
  bool any_error() const {
    return std::any_of(variants.begin(), variants.end(),
                       [](const VariantResult& v) { return v.verdict == VariantVerdict::Error; });
  }
};

inline std::string variant_dir_name(std::size_t index) { return fmt::format("variant_{:04d}", index); }

/// Runs one variant; writes its report files under out_dir when given.
inline VariantResult run_variant(const ScenarioSpec& base, const WorldModel& world, const EnvVariant& v,
                                 const std::optional<std::filesystem::path>& out_dir) {
  VariantResult r;
  r.variant = v;
  try {
    const ScenarioSpec s = apply_variant(base, v);
    if (auto diags = validate_semantics(s, world); has_errors(diags)) {
      for (const auto& d : diags)
        if (d.is_error()) throw InvalidArgument(d.to_string());
    }
    const RunArtifacts art = run_simulation(s, world);
    const AcceptanceReport rep = build_report(art, s);
    for (const auto& p : rep.property_results)
      if (!p.passed) r.violated_properties.push_back(p.property_id);
    r.verdict = r.violated_properties.empty() ? VariantVerdict::AllPass : VariantVerdict::Violated;
    if (out_dir) {
      r.report_dir = variant_dir_name(v.index);
      write_outputs(rep, art, world, *out_dir / r.report_dir);
    }
  } catch (const std::exception& e) {
    r.verdict = VariantVerdict::Error;
    r.violated_properties.clear();
    r.error = e.what();
  }
  return r;
}

/// Runs every variant with up to `jobs` concurrent workers. Results are
/// stored by variant index, so the report does not depend on scheduling.
inline CampaignReport run_campaign(const ScenarioSpec& base, const WorldModel& world, const FuzzSpec& spec,
                                   std::size_t jobs = 1,
                                   const std::optional<std::filesystem::path>& out_dir = std::nullopt) {
  CampaignReport report{base, spec, {}};
  const std::vector<EnvVariant> variants = generate_variants(spec);
  report.variants.resize(variants.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < variants.size(); i = next++)
      report.variants[i] = run_variant(base, world, variants[i], out_dir);
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, variants.size()));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return report;
}

inline nlohmann::json campaign_to_json(const CampaignReport& c) {
  using nlohmann::json;
  auto assignments_json = [](const EnvVariant& v) {
    json a = json::array();
    for (const auto& x : v.assignments) a.push_back({{"target", x.target}, {"value", x.value}});
    return a;
  };
  json variants = json::array();
  json failing = json::array();
  std::size_t passed = 0, violated = 0, errors = 0;
  for (const auto& r : c.variants) {
    json v{{"index", r.variant.index},
           {"run_seed", r.variant.run_seed},
           {"assignments", assignments_json(r.variant)},
           {"verdict", to_string(r.verdict)},
           {"violated_properties", r.violated_properties},
           {"error", r.error.empty() ? json(nullptr) : json(r.error)},
           {"report_dir", r.report_dir.empty() ? json(nullptr) : json(r.report_dir)}};
    variants.push_back(v);
    if (r.verdict == VariantVerdict::Violated) {
      ++violated;
      failing.push_back({{"index", r.variant.index},
                         {"assignments", assignments_json(r.variant)},
                         {"violated_properties", r.violated_properties}});
    } else if (r.verdict == VariantVerdict::Error) {
      ++errors;
    } else {
      ++passed;
    }
  }
  return {{"format_version", kCampaignFormatVersion},
          {"campaign_seed", c.spec.campaign_seed},
          {"n_variants", c.spec.n_variants},
          {"campaign", fuzz_spec_to_json(c.spec)},
          {"base_scenario", scenario_to_json(c.base)},
          {"summary", {{"all_pass", passed}, {"violated", violated}, {"error", errors}}},
          {"variants", variants},
          {"failing_assignments", failing}};
}

inline std::string dump_campaign(const CampaignReport& c) { return campaign_to_json(c).dump(2) + "\n"; }

}  // namespace skyrig
