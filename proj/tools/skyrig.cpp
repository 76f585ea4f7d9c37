// skyrig command-line front end.
//
// Exit codes: 0 = every configured property passed, 1 = a completed run or
// campaign found violations, 2 = usage, validation or runtime error.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "skyrig/bench.hpp"
#include "skyrig/engine.hpp"
#include "skyrig/fuzz.hpp"
#include "skyrig/report.hpp"
#include "skyrig/scenario.hpp"
#include "skyrig/service.hpp"
#include "skyrig/world.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitViolations = 1;
constexpr int kExitError = 2;

struct Loaded {
  skyrig::ScenarioSpec spec;
  skyrig::WorldModel world;
};

// Parses and validates; prints diagnostics. nullopt means errors were found.
std::optional<Loaded> load_scenario(const std::string& path) {
  std::string text;
  try {
    text = skyrig::read_text_file(path);
  } catch (const skyrig::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
  skyrig::ParseResult pr = skyrig::parse_scenario(text);
  if (!pr.ok()) {
    for (const auto& d : pr.errors) std::cerr << path << ": " << d.to_string() << "\n";
    return std::nullopt;
  }
  std::optional<skyrig::WorldModel> world;
  try {
    world = skyrig::load_map(pr.spec->environment.map, std::filesystem::path(path).parent_path());
  } catch (const skyrig::Error& e) {
    std::cerr << path << ": error: environment.map: " << e.what() << "\n";
    return std::nullopt;
  }
  const auto diags = skyrig::validate_semantics(*pr.spec, *world);
  for (const auto& d : diags) std::cerr << path << ": " << d.to_string() << "\n";
  if (skyrig::has_errors(diags)) return std::nullopt;
  return Loaded{std::move(*pr.spec), std::move(*world)};
}

int cmd_run(const std::string& scenario, const std::string& out_dir, std::optional<std::uint64_t> seed) {
  auto loaded = load_scenario(scenario);
  if (!loaded) return kExitError;
  if (seed) loaded->spec.sim.seed = *seed;
  try {
    const auto start = std::chrono::steady_clock::now();
    const auto art = skyrig::run_simulation(loaded->spec, loaded->world);
    const auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto report = skyrig::build_report(art, loaded->spec);
    skyrig::write_outputs(report, art, loaded->world, out_dir);
    for (const auto& p : report.property_results)
      std::cout << (p.passed ? "PASS " : "FAIL ") << p.property_id << ": " << p.description << "\n";
    std::cerr << fmt::format("{} ticks ({} s simulated) in {:.3f} s wall, termination {}\n", art.ticks_executed,
                             report.run.simulated_time_s, wall, skyrig::to_string(art.termination));
    return report.all_passed() ? kExitPass : kExitViolations;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_fuzz(const std::string& scenario, const std::string& campaign_path, const std::string& out_dir,
             std::size_t jobs) {
  auto loaded = load_scenario(scenario);
  if (!loaded) return kExitError;
  try {
    const auto fuzz = skyrig::parse_fuzz_spec(nlohmann::json::parse(skyrig::read_text_file(campaign_path)));
    const auto campaign = skyrig::run_campaign(loaded->spec, loaded->world, fuzz, jobs, out_dir);
    skyrig::write_text_file(std::filesystem::path(out_dir) / "campaign.json", skyrig::dump_campaign(campaign));
    for (const auto& v : campaign.variants) {
      std::string line = fmt::format("variant {:4d} {}", v.variant.index, skyrig::to_string(v.verdict));
      for (const auto& p : v.violated_properties) line += " " + p;
      if (!v.error.empty()) line += " (" + v.error + ")";
      std::cout << line << "\n";
    }
    if (campaign.any_violated()) return kExitViolations;
    return campaign.any_error() ? kExitError : kExitPass;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_validate(const std::string& scenario) {
  auto loaded = load_scenario(scenario);
  if (!loaded) return kExitError;
  std::cout << scenario << ": ok\n";
  return kExitPass;
}

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

int cmd_serve(skyrig::service::ServiceConfig cfg) {
  if (cfg.port < 0 || cfg.port > 65535) {
    std::cerr << "error: invalid port " << cfg.port << "\n";
    return kExitError;
  }
  try {
    skyrig::service::Service svc(cfg);
    if (svc.bind() < 0) {
      std::cerr << "error: cannot bind " << cfg.bind_address << ":" << cfg.port << "\n";
      return kExitError;
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    svc.start_background();
    std::cerr << "listening on " << cfg.bind_address << ":" << svc.port() << " (data dir " << cfg.data_dir.string()
              << ", " << cfg.workers << " worker" << (cfg.workers == 1 ? "" : "s") << ")\n";
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    std::cerr << "shutting down after the current task\n";
    svc.stop();
    return kExitPass;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_bench(std::size_t uavs, double duration, double dt, const std::string& out) {
  if (uavs < 1 || !(duration > 0) || !(dt > 0 && dt <= skyrig::kMaxDtS)) {
    std::cerr << "error: need --uavs >= 1, --duration > 0 and --dt in (0, 0.1]\n";
    return kExitError;
  }
  try {
    const auto r = skyrig::run_bench(uavs, duration, dt);
    if (!out.empty()) {
      const std::filesystem::path p(out);
      if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
      skyrig::write_text_file(p, skyrig::bench_ticks_csv(r));
      auto summary = p;
      summary.replace_filename(p.stem().string() + "_summary.csv");
      skyrig::write_text_file(summary, skyrig::bench_summary_csv(r));
    }
    std::cout << skyrig::bench_summary_csv(r);
    return kExitPass;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skyrig: headless multi-UAV simulation test harness"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "out", campaign;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;

  auto* run = app.add_subcommand("run", "Run a scenario and write its acceptance report");
  run->add_option("scenario", scenario, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--seed", seed, "Override sim.seed");

  auto* fuzz = app.add_subcommand("fuzz", "Run a fuzz campaign over environment parameters");
  fuzz->add_option("scenario", scenario, "Base scenario JSON file")->required();
  fuzz->add_option("--campaign", campaign, "Campaign spec JSON file")->required();
  fuzz->add_option("--out", out_dir, "Output directory")->capture_default_str();
  fuzz->add_option("--jobs", jobs, "Concurrent variants")->check(CLI::PositiveNumber)->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  validate->add_option("scenario", scenario, "Scenario JSON file")->required();

  auto cfg = skyrig::service::ServiceConfig::from_env();
  std::string data_dir = cfg.data_dir.string();
  auto* serve = app.add_subcommand("serve", "Start the REST service");
  serve->add_option("--bind", cfg.bind_address, "Bind address (SKYRIG_BIND)")->capture_default_str();
  serve->add_option("--port", cfg.port, "Port (SKYRIG_PORT)")->capture_default_str();
  serve->add_option("--data-dir", data_dir, "Task data directory (SKYRIG_DATA_DIR)")->capture_default_str();
  serve->add_option("--workers", cfg.workers, "Worker threads (SKYRIG_WORKERS)")->check(CLI::PositiveNumber)->capture_default_str();

  std::size_t bench_uavs = 5;
  double bench_duration = 60.0, bench_dt = 0.02;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Scaling benchmark over a synthesized fleet");
  bench->add_option("--uavs", bench_uavs, "Number of UAVs")->capture_default_str();
  bench->add_option("--duration", bench_duration, "Simulated seconds")->capture_default_str();
  bench->add_option("--dt", bench_dt, "Timestep in seconds")->capture_default_str();
  bench->add_option("--out", bench_out, "Per-tick CSV path (summary written alongside)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  if (*run) return cmd_run(scenario, out_dir, seed);
  if (*fuzz) return cmd_fuzz(scenario, campaign, out_dir, jobs);
  if (*validate) return cmd_validate(scenario);
  if (*serve) {
    cfg.data_dir = data_dir;
    return cmd_serve(cfg);
  }
  if (*bench) return cmd_bench(bench_uavs, bench_duration, bench_dt, bench_out);
  return kExitError;
}
