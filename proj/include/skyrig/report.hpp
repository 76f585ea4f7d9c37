#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "skyrig/engine.hpp"
#include "skyrig/error.hpp"
#include "skyrig/monitors.hpp"
#include "skyrig/scenario.hpp"

namespace skyrig {

inline constexpr int kReportFormatVersion = 1;

/// Column order of telemetry.csv.
inline const std::vector<std::string>& telemetry_columns() {
  static const std::vector<std::string> cols{"tick",   "time_s",  "uav_id",    "north_m",     "east_m",
                                             "down_m", "lat_deg", "lon_deg",   "alt_m",       "speed_mps",
                                             "heading_deg", "phase", "active_waypoint"};
  return cols;
}

struct SeriesFile {
  std::string file;
  std::string property_id;  // empty for telemetry/sensor files
  std::string uav_id;       // set for per-UAV series
  std::vector<std::string> columns;

  bool operator==(const SeriesFile&) const = default;
};

struct PropertyResult {
  std::string property_id;
  std::string kind;
  bool passed = true;
  std::size_t violation_count = 0;
  std::optional<double> worst_value;
  std::optional<double> threshold;
  std::string description;

  bool operator==(const PropertyResult&) const = default;
};

struct RunSummary {
  std::uint64_t seed = 0;
  std::string termination;
  std::size_t ticks_executed = 0;
  double dt_s = 0.0;
  double simulated_time_s = 0.0;
  std::size_t uav_count = 0;

  bool operator==(const RunSummary&) const = default;
};

struct AcceptanceReport {
  int format_version = kReportFormatVersion;
  nlohmann::json scenario;
  RunSummary run;
  std::vector<PropertyResult> property_results;
  std::vector<ViolationRecord> violations;
  std::vector<SeriesFile> series;

  bool all_passed() const {
    return std::all_of(property_results.begin(), property_results.end(),
                       [](const PropertyResult& r) { return r.passed; });
  }
  bool operator==(const AcceptanceReport&) const = default;
};

namespace detail {

inline std::string fmt_num(double v) { return fmt::format("{}", v); }

inline std::string describe(const SafetyProperty& prop, const PropertyResult& r,
                            const std::vector<const ViolationRecord*>& recs) {
  const std::string who = prop.scope ? "UAVs in scope" : "all UAVs";
  if (r.passed) {
    return std::visit(
        [&](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, MaxPathDeviation>)
            return "Passed: path deviation stayed within " + fmt_num(k.max_m) + " m for " + who + ".";
          else if constexpr (std::is_same_v<K, MinSeparation>)
            return "Passed: airborne UAVs kept at least " + fmt_num(k.min_m) + " m apart.";
          else if constexpr (std::is_same_v<K, NoCollision>)
            return "Passed: no collisions for " + who + ".";
          else if constexpr (std::is_same_v<K, SafeLanding>)
            return "Passed: " + who + " landed inside a safe landing zone.";
          else
            return "Passed: no UAV entered the no-fly zone.";
        },
        prop.kind);
  }
  const ViolationRecord& first = *recs.front();
  std::string ids;
  for (const auto& id : first.uav_ids) ids += (ids.empty() ? "" : " and ") + id;
  std::string s = "Failed: " + std::to_string(recs.size()) + " violation episode" + (recs.size() == 1 ? "" : "s");
  if (r.worst_value && r.threshold) {
    const bool below = std::holds_alternative<MinSeparation>(prop.kind) ||
                       std::holds_alternative<NoCollision>(prop.kind);
    s += "; worst value " + fmt_num(*r.worst_value) + " m " + (below ? "below" : "beyond") + " the " +
         fmt_num(*r.threshold) + " m limit";
  }
  s += "; first by " + ids + " at t=" + fmt_num(first.start_time_s) + " s";
  if (!first.detail.empty()) s += " (" + first.detail + ")";
  return s + ".";
}

}  // namespace detail

/// Series files a report will reference, derived from the properties alone.
inline std::vector<SeriesFile> series_manifest(const ScenarioSpec& spec) {
  std::vector<SeriesFile> out;
  out.push_back({"telemetry.csv", "", "", telemetry_columns()});
  const bool any_sensor = std::any_of(spec.uavs.begin(), spec.uavs.end(), [](const UavSpec& u) {
    return u.sensors.gps.enabled || u.sensors.barometer.enabled || u.sensors.magnetometer.enabled;
  });
  if (any_sensor)
    out.push_back({"sensors.csv", "", "",
                   {"tick", "time_s", "uav_id", "gps_north_m", "gps_east_m", "gps_down_m", "baro_alt_m",
                    "mag_heading_deg"}});
  const auto count_kind = [&](std::size_t index) {
    return std::count_if(spec.test_properties.begin(), spec.test_properties.end(),
                         [&](const SafetyProperty& p) { return p.kind.index() == index; });
  };
  const bool single_dev = count_kind(0) == 1;
  const bool single_sep = count_kind(1) == 1;
  for (const auto& p : spec.test_properties) {
    if (std::holds_alternative<MaxPathDeviation>(p.kind)) {
      for (const auto& u : spec.uavs) {
        if (!p.applies_to(u.id)) continue;
        const std::string name = single_dev ? "deviation_" + u.id + ".csv" : "deviation_" + p.id + "_" + u.id + ".csv";
        out.push_back({name, p.id, u.id, {"time_s", "deviation_m", "threshold_m"}});
      }
    } else if (std::holds_alternative<MinSeparation>(p.kind)) {
      out.push_back({single_sep ? "separation.csv" : "separation_" + p.id + ".csv", p.id, "",
                     {"time_s", "min_separation_m", "threshold_m", "pair"}});
    }
  }
  return out;
}

/// Verdicts follow the violation list: a property passes iff it has no
/// violation records.
inline AcceptanceReport build_report(const RunArtifacts& artifacts, const ScenarioSpec& spec) {
  AcceptanceReport rep;
  rep.scenario = scenario_to_json(spec);
  rep.run = {artifacts.seed,
             std::string(to_string(artifacts.termination)),
             artifacts.ticks_executed,
             spec.sim.dt_s,
             static_cast<double>(artifacts.ticks_executed) * spec.sim.dt_s,
             spec.uavs.size()};
  rep.violations = artifacts.violations;
  SafetyMonitor::sort_records(rep.violations, spec.test_properties);
  for (const auto& prop : spec.test_properties) {
    PropertyResult r;
    r.property_id = prop.id;
    r.kind = std::string(kind_name(prop.kind));
    std::vector<const ViolationRecord*> recs;
    for (const auto& v : rep.violations)
      if (v.property_id == prop.id) recs.push_back(&v);
    r.violation_count = recs.size();
    r.passed = recs.empty();
    const bool lower_is_worse = std::holds_alternative<MinSeparation>(prop.kind);
    for (const ViolationRecord* v : recs) {
      if (!v->worst_value) continue;
      if (!r.worst_value || (lower_is_worse ? *v->worst_value < *r.worst_value : *v->worst_value > *r.worst_value)) {
        r.worst_value = v->worst_value;
        r.threshold = v->threshold;
      }
    }
    if (!r.threshold) {
      if (const auto* d = std::get_if<MaxPathDeviation>(&prop.kind)) r.threshold = d->max_m;
      if (const auto* s = std::get_if<MinSeparation>(&prop.kind)) r.threshold = s->min_m;
    }
    r.description = detail::describe(prop, r, recs);
    rep.property_results.push_back(std::move(r));
  }
  rep.series = series_manifest(spec);
  return rep;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json opt_num(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
inline std::optional<double> get_opt_num(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace detail

inline nlohmann::json violation_to_json(const ViolationRecord& v) {
  nlohmann::json pos = nullptr;
  if (v.position) pos = {{"north", v.position->north}, {"east", v.position->east}, {"down", v.position->down}};
  return {{"property_id", v.property_id},
          {"kind", v.kind},
          {"uav_ids", v.uav_ids},
          {"start_tick", v.start_tick},
          {"end_tick", v.end_tick},
          {"start_time_s", v.start_time_s},
          {"end_time_s", v.end_time_s},
          {"worst_value", detail::opt_num(v.worst_value)},
          {"threshold", detail::opt_num(v.threshold)},
          {"units", v.units},
          {"position", pos},
          {"detail", v.detail}};
}

inline ViolationRecord violation_from_json(const nlohmann::json& j) {
  ViolationRecord v;
  v.property_id = j.at("property_id").get<std::string>();
  v.kind = j.at("kind").get<std::string>();
  v.uav_ids = j.at("uav_ids").get<std::vector<std::string>>();
  v.start_tick = j.at("start_tick").get<std::size_t>();
  v.end_tick = j.at("end_tick").get<std::size_t>();
  v.start_time_s = j.at("start_time_s").get<double>();
  v.end_time_s = j.at("end_time_s").get<double>();
  v.worst_value = detail::get_opt_num(j.at("worst_value"));
  v.threshold = detail::get_opt_num(j.at("threshold"));
  v.units = j.at("units").get<std::string>();
  if (const auto& p = j.at("position"); !p.is_null())
    v.position = NedPosition{p.at("north").get<double>(), p.at("east").get<double>(), p.at("down").get<double>()};
  v.detail = j.at("detail").get<std::string>();
  return v;
}

inline nlohmann::json report_to_json(const AcceptanceReport& r) {
  using nlohmann::json;
  json results = json::array();
  for (const auto& p : r.property_results)
    results.push_back({{"property_id", p.property_id},
                       {"kind", p.kind},
                       {"verdict", p.passed ? "pass" : "fail"},
                       {"violation_count", p.violation_count},
                       {"worst_value", detail::opt_num(p.worst_value)},
                       {"threshold", detail::opt_num(p.threshold)},
                       {"description", p.description}});
  json violations = json::array();
  for (const auto& v : r.violations) violations.push_back(violation_to_json(v));
  json series = json::array();
  for (const auto& s : r.series) {
    json entry{{"file", s.file}, {"columns", s.columns}};
    entry["property_id"] = s.property_id.empty() ? json(nullptr) : json(s.property_id);
    entry["uav_id"] = s.uav_id.empty() ? json(nullptr) : json(s.uav_id);
    series.push_back(entry);
  }
  return {{"format_version", r.format_version},
          {"scenario", r.scenario},
          {"run",
           {{"seed", r.run.seed},
            {"termination", r.run.termination},
            {"ticks_executed", r.run.ticks_executed},
            {"dt_s", r.run.dt_s},
            {"simulated_time_s", r.run.simulated_time_s},
            {"uav_count", r.run.uav_count}}},
          {"property_results", results},
          {"violations", violations},
          {"series", series}};
}

inline AcceptanceReport report_from_json(const nlohmann::json& j) {
  AcceptanceReport r;
  r.format_version = j.at("format_version").get<int>();
  r.scenario = j.at("scenario");
  const auto& run = j.at("run");
  r.run = {run.at("seed").get<std::uint64_t>(),       run.at("termination").get<std::string>(),
           run.at("ticks_executed").get<std::size_t>(), run.at("dt_s").get<double>(),
           run.at("simulated_time_s").get<double>(),    run.at("uav_count").get<std::size_t>()};
  for (const auto& p : j.at("property_results"))
    r.property_results.push_back({p.at("property_id").get<std::string>(), p.at("kind").get<std::string>(),
                                  p.at("verdict") == "pass", p.at("violation_count").get<std::size_t>(),
                                  detail::get_opt_num(p.at("worst_value")), detail::get_opt_num(p.at("threshold")),
                                  p.at("description").get<std::string>()});
  for (const auto& v : j.at("violations")) r.violations.push_back(violation_from_json(v));
  for (const auto& s : j.at("series"))
    r.series.push_back({s.at("file").get<std::string>(),
                        s.at("property_id").is_null() ? "" : s.at("property_id").get<std::string>(),
                        s.at("uav_id").is_null() ? "" : s.at("uav_id").get<std::string>(),
                        s.at("columns").get<std::vector<std::string>>()});
  return r;
}

/// Canonical serialized form, byte-stable for equal reports.
inline std::string dump_report(const AcceptanceReport& r) { return report_to_json(r).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline std::string telemetry_csv(const std::vector<TelemetryRecord>& telemetry) {
  std::string out;
  for (std::size_t i = 0; i < telemetry_columns().size(); ++i)
    out += (i ? "," : "") + telemetry_columns()[i];
  out += '\n';
  for (const auto& r : telemetry)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.tick, r.time_s, r.uav_id, r.position.north,
                       r.position.east, r.position.down, r.geodetic.latitude_deg, r.geodetic.longitude_deg,
                       r.altitude_m, r.speed_mps, r.heading_deg, to_string(r.phase), r.active_waypoint);
  return out;
}

/// Writes report.json, telemetry.csv, sensors.csv and the per-property
/// series into out_dir. Returns the file names written.
inline std::vector<std::string> write_outputs(const AcceptanceReport& report, const RunArtifacts& artifacts,
                                              const WorldModel& world, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  const ScenarioSpec& spec = artifacts.scenario;
  const ResolvedScenario rs = resolve(spec, world);
  auto uav_index = [&](const std::string& id) {
    for (std::size_t i = 0; i < rs.uavs.size(); ++i)
      if (rs.uavs[i].id == id) return i;
    throw Error("unknown UAV id in telemetry: " + id);
  };
  const std::size_t n = rs.uavs.size();

  std::vector<std::string> manifest{"report.json"};
  write_text_file(out_dir / "report.json", dump_report(report));
  for (const SeriesFile& s : report.series) {
    std::string text;
    for (std::size_t i = 0; i < s.columns.size(); ++i) text += (i ? "," : "") + s.columns[i];
    text += '\n';
    if (s.file == "telemetry.csv") {
      text = telemetry_csv(artifacts.telemetry);
    } else if (s.file == "sensors.csv") {
      auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
      for (const auto& r : artifacts.telemetry) {
        const auto& g = r.gps_estimate;
        text += fmt::format("{},{},{},{},{},{},{},{}\n", r.tick, r.time_s, r.uav_id,
                            opt(g ? std::optional(g->north) : std::nullopt),
                            opt(g ? std::optional(g->east) : std::nullopt),
                            opt(g ? std::optional(g->down) : std::nullopt), opt(r.baro_altitude_m),
                            opt(r.mag_heading_deg));
      }
    } else {
      const SafetyProperty* prop = nullptr;
      for (const auto& p : spec.test_properties)
        if (p.id == s.property_id) prop = &p;
      if (!prop) throw Error("series references unknown property " + s.property_id);
      if (const auto* dev = std::get_if<MaxPathDeviation>(&prop->kind)) {
        const ResolvedUav& u = rs.uavs[uav_index(s.uav_id)];
        for (const auto& r : artifacts.telemetry) {
          if (r.uav_id != s.uav_id || !is_airborne(r.phase)) continue;
          const double d = path_deviation(r.position, active_segment(u.plan, u.home, r.active_waypoint), r.phase);
          text += fmt::format("{},{},{}\n", r.time_s, d, dev->max_m);
        }
      } else if (const auto* sep = std::get_if<MinSeparation>(&prop->kind)) {
        for (std::size_t base = 0; base + n <= artifacts.telemetry.size(); base += n) {
          std::vector<UavState> states;
          std::vector<std::string> ids;
          for (std::size_t k = 0; k < n; ++k) {
            const auto& r = artifacts.telemetry[base + k];
            if (!prop->applies_to(r.uav_id)) continue;
            UavState st;
            st.id = r.uav_id;
            st.position = r.position;
            st.phase = r.phase;
            states.push_back(st);
          }
          if (auto m = min_pairwise_separation(states))
            text += fmt::format("{},{},{},{}|{}\n", artifacts.telemetry[base].time_s, m->distance_m, sep->min_m,
                                states[m->first].id, states[m->second].id);
        }
      }
    }
    write_text_file(out_dir / s.file, text);
    manifest.push_back(s.file);
  }
  return manifest;
}

}  // namespace skyrig
