#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "skyrig/engine.hpp"
#include "skyrig/fuzz.hpp"
#include "skyrig/report.hpp"
#include "skyrig/scenario.hpp"
#include "skyrig/world.hpp"

namespace skyrig::service {

enum class TaskKind { Simulation, Campaign };
enum class TaskStatus { Queued, Running, Done, Failed };

inline std::string_view to_string(TaskKind k) { return k == TaskKind::Simulation ? "simulation" : "campaign"; }

inline std::string_view to_string(TaskStatus s) {
  switch (s) {
    case TaskStatus::Queued: return "queued";
    case TaskStatus::Running: return "running";
    case TaskStatus::Done: return "done";
    case TaskStatus::Failed: return "failed";
  }
  return "unknown";
}

inline std::optional<TaskStatus> status_from_string(std::string_view s) {
  for (auto st : {TaskStatus::Queued, TaskStatus::Running, TaskStatus::Done, TaskStatus::Failed})
    if (to_string(st) == s) return st;
  return std::nullopt;
}

struct StatusChange {
  TaskStatus status;
  double at = 0.0;
};

struct TaskRecord {
  std::string task_id;
  TaskKind kind = TaskKind::Simulation;
  TaskStatus status = TaskStatus::Queued;
  double submitted_at = 0.0;
  std::optional<double> started_at;
  std::optional<double> finished_at;
  std::optional<std::size_t> completion_index;
  std::string result_location;
  std::string error;
  std::vector<StatusChange> history;

  nlohmann::json to_json() const {
    using nlohmann::json;
    json hist = json::array();
    for (const auto& h : history) hist.push_back({{"status", to_string(h.status)}, {"at", h.at}});
    auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
    return {{"task_id", task_id},
            {"kind", to_string(kind)},
            {"status", to_string(status)},
            {"submitted_at", submitted_at},
            {"started_at", opt(started_at)},
            {"finished_at", opt(finished_at)},
            {"completion_index", opt(completion_index)},
            {"result_location", result_location.empty() ? json(nullptr) : json(result_location)},
            {"error", error.empty() ? json(nullptr) : json(error)},
            {"history", hist}};
  }
};

struct TaskPayload {
  ScenarioSpec scenario;
  std::optional<FuzzSpec> campaign;
};

inline double now_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

inline std::string new_task_id() {
  static std::mutex mu;
  static std::random_device rd;
  static std::mt19937_64 gen(rd());
  std::lock_guard lock(mu);
  return fmt::format("{:016x}{:016x}", gen(), gen());
}

/// FIFO task queue with a fixed worker pool. With one worker, tasks finish
/// in submission order; with more, only start order is FIFO. Finished tasks
/// persist under <data_dir>/<task_id>/; queued and running tasks do not
/// survive a restart.
class TaskQueue {
public:
  TaskQueue(std::filesystem::path data_dir, std::size_t workers = 1) : data_dir_(std::move(data_dir)) {
    std::filesystem::create_directories(data_dir_);
    load_finished();
    for (std::size_t i = 0; i < std::max<std::size_t>(1, workers); ++i) workers_.emplace_back([this] { work(); });
  }

  TaskQueue(const TaskQueue&) = delete;
  TaskQueue& operator=(const TaskQueue&) = delete;

  ~TaskQueue() { shutdown(); }

  std::string submit(TaskPayload payload) {
    const TaskKind kind = payload.campaign ? TaskKind::Campaign : TaskKind::Simulation;
    std::lock_guard lock(mu_);
    TaskRecord rec;
    rec.task_id = new_task_id();
    rec.kind = kind;
    rec.submitted_at = now_seconds();
    rec.history.push_back({TaskStatus::Queued, rec.submitted_at});
    const std::string id = rec.task_id;
    tasks_.emplace(id, std::move(rec));
    queue_.push_back({id, std::move(payload)});
    cv_.notify_one();
    return id;
  }

  std::optional<TaskRecord> get(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = tasks_.find(id);
    if (it == tasks_.end()) return std::nullopt;
    return it->second;
  }

  /// Stored report bytes of a Done task.
  std::optional<std::string> report_bytes(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = reports_.find(id);
    if (it == reports_.end()) return std::nullopt;
    return it->second;
  }

  /// Stops accepting work, lets running tasks finish, drops queued ones.
  void shutdown() {
    {
      std::lock_guard lock(mu_);
      if (stopping_) return;
      stopping_ = true;
      queue_.clear();
    }
    cv_.notify_all();
    for (auto& t : workers_)
      if (t.joinable()) t.join();
  }

  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

private:
  struct Job {
    std::string id;
    TaskPayload payload;
  };

  void work() {
    for (;;) {
      Job job;
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (stopping_) return;
        job = std::move(queue_.front());
        queue_.pop_front();
        auto& rec = tasks_.at(job.id);
        rec.status = TaskStatus::Running;
        rec.started_at = std::max(now_seconds(), rec.submitted_at);
        rec.history.push_back({TaskStatus::Running, *rec.started_at});
      }
      const auto dir = data_dir_ / job.id;
      std::string report, error, file;
      try {
        const WorldModel world = load_map(job.payload.scenario.environment.map);
        if (job.payload.campaign) {
          const CampaignReport c = run_campaign(job.payload.scenario, world, *job.payload.campaign, 1, dir);
          report = dump_campaign(c);
          file = "campaign.json";
          write_text_file(dir / file, report);
        } else {
          const RunArtifacts art = run_simulation(job.payload.scenario, world);
          const AcceptanceReport rep = build_report(art, job.payload.scenario);
          write_outputs(rep, art, world, dir);
          report = dump_report(rep);
          file = "report.json";
        }
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(mu_);
      auto& rec = tasks_.at(job.id);
      rec.finished_at = std::max(now_seconds(), *rec.started_at);
      rec.completion_index = completed_++;
      if (error.empty()) {
        rec.status = TaskStatus::Done;
        rec.result_location = (dir / file).string();
        reports_[job.id] = std::move(report);
      } else {
        rec.status = TaskStatus::Failed;
        rec.error = error;
      }
      rec.history.push_back({rec.status, *rec.finished_at});
      try {
        std::filesystem::create_directories(dir);
        write_text_file(dir / "task.json", rec.to_json().dump(2) + "\n");
      } catch (const std::exception&) {
        // The in-memory record stays authoritative for this process.
      }
    }
  }

  void load_finished() {
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(data_dir_, ec)) {
      const auto task_file = entry.path() / "task.json";
      if (!std::filesystem::exists(task_file)) continue;
      try {
        const auto j = nlohmann::json::parse(read_text_file(task_file.string()));
        TaskRecord rec;
        rec.task_id = j.at("task_id").get<std::string>();
        rec.kind = j.at("kind") == "campaign" ? TaskKind::Campaign : TaskKind::Simulation;
        const auto status = status_from_string(j.at("status").get<std::string>());
        if (status != TaskStatus::Done && status != TaskStatus::Failed) continue;
        rec.status = *status;
        rec.submitted_at = j.at("submitted_at").get<double>();
        if (!j.at("started_at").is_null()) rec.started_at = j.at("started_at").get<double>();
        if (!j.at("finished_at").is_null()) rec.finished_at = j.at("finished_at").get<double>();
        if (!j.at("result_location").is_null()) rec.result_location = j.at("result_location").get<std::string>();
        if (!j.at("error").is_null()) rec.error = j.at("error").get<std::string>();
        for (const auto& h : j.at("history"))
          if (auto s = status_from_string(h.at("status").get<std::string>()))
            rec.history.push_back({*s, h.at("at").get<double>()});
        if (rec.status == TaskStatus::Done) reports_[rec.task_id] = read_text_file(rec.result_location);
        tasks_.emplace(rec.task_id, std::move(rec));
      } catch (const std::exception&) {
        continue;  // unreadable leftovers are ignored
      }
    }
  }

  std::filesystem::path data_dir_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Job> queue_;
  std::map<std::string, TaskRecord> tasks_;
  std::map<std::string, std::string> reports_;
  std::size_t completed_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "skyrig-data";
  std::size_t workers = 1;

  /// Overrides defaults from SKYRIG_BIND, SKYRIG_PORT, SKYRIG_DATA_DIR and
  /// SKYRIG_WORKERS.
  static ServiceConfig from_env() {
    ServiceConfig c;
    if (const char* v = std::getenv("SKYRIG_BIND")) c.bind_address = v;
    if (const char* v = std::getenv("SKYRIG_PORT")) c.port = std::atoi(v);
    if (const char* v = std::getenv("SKYRIG_DATA_DIR")) c.data_dir = v;
    if (const char* v = std::getenv("SKYRIG_WORKERS")) c.workers = static_cast<std::size_t>(std::max(1, std::atoi(v)));
    return c;
  }
};

struct Rejection {
  int status = 400;
  nlohmann::json body;
};

namespace detail {

inline nlohmann::json diagnostics_json(const std::vector<Diagnostic>& diags, const std::string& prefix = "") {
  nlohmann::json errs = nlohmann::json::array();
  for (const auto& d : diags)
    errs.push_back({{"severity", d.is_error() ? "error" : "warning"},
                    {"path", prefix.empty() || d.path == "$" ? prefix + d.path : prefix + "." + d.path},
                    {"message", d.message}});
  return errs;
}

/// Parses and validates a scenario document. 400 for schema problems, 422
/// when the scenario does not fit its map.
inline std::variant<ScenarioSpec, Rejection> admit_scenario(const nlohmann::json& doc, const std::string& prefix) {
  ParseResult pr = parse_scenario_json(doc);
  if (!pr.ok()) return Rejection{400, {{"errors", diagnostics_json(pr.errors, prefix)}}};
  try {
    const WorldModel world = load_map(pr.spec->environment.map);
    auto diags = validate_semantics(*pr.spec, world);
    if (has_errors(diags)) return Rejection{422, {{"errors", diagnostics_json(diags, prefix)}}};
  } catch (const Error& e) {
    const std::string path = prefix.empty() ? "environment.map" : prefix + ".environment.map";
    return Rejection{422, {{"errors", nlohmann::json::array({{{"severity", "error"}, {"path", path}, {"message", e.what()}}})}}};
  }
  return std::move(*pr.spec);
}

}  // namespace detail

/// HTTP/1.1 JSON front end over a TaskQueue.
class Service {
public:
  explicit Service(const ServiceConfig& cfg) : cfg_(cfg), queue_(cfg.data_dir, cfg.workers) { routes(); }

  ~Service() { stop(); }

  /// Binds the listening socket; port 0 picks a free port. Returns the
  /// bound port or -1.
  int bind() {
    if (cfg_.port == 0)
      port_ = server_.bind_to_any_port(cfg_.bind_address);
    else
      port_ = server_.bind_to_port(cfg_.bind_address, cfg_.port) ? cfg_.port : -1;
    return port_;
  }

  /// Blocks serving requests until stop().
  bool listen() { return server_.listen_after_bind(); }

  void start_background() {
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
    queue_.shutdown();
  }

  int port() const noexcept { return port_; }
  TaskQueue& queue() noexcept { return queue_; }

private:
  static void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static std::optional<nlohmann::json> parse_body(const httplib::Request& req, httplib::Response& res) {
    try {
      return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
      send_json(res, 400,
                {{"errors", nlohmann::json::array({{{"severity", "error"}, {"path", "$"}, {"message", std::string("syntax error: ") + e.what()}}})}});
      return std::nullopt;
    }
  }

  void accepted(httplib::Response& res, const std::string& id) {
    send_json(res, 202, {{"task_id", id}, {"status", "queued"}});
  }

  void routes() {
    server_.Get("/api/v1/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });

    server_.Post("/api/v1/simulations", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      auto admitted = detail::admit_scenario(*body, "");
      if (auto* rej = std::get_if<Rejection>(&admitted)) return send_json(res, rej->status, rej->body);
      accepted(res, queue_.submit({std::get<ScenarioSpec>(std::move(admitted)), std::nullopt}));
    });

    server_.Post("/api/v1/campaigns", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = parse_body(req, res);
      if (!body) return;
      auto error = [&](const std::string& path, const std::string& msg) {
        send_json(res, 400, {{"errors", nlohmann::json::array({{{"severity", "error"}, {"path", path}, {"message", msg}}})}});
      };
      if (!body->is_object() || !body->contains("scenario") || !body->contains("campaign") || body->size() != 2)
        return error("$", "expected {\"scenario\": {...}, \"campaign\": {...}}");
      FuzzSpec fuzz;
      try {
        fuzz = parse_fuzz_spec((*body)["campaign"]);
      } catch (const Error& e) {
        return error("campaign", e.what());
      }
      auto admitted = detail::admit_scenario((*body)["scenario"], "scenario");
      if (auto* rej = std::get_if<Rejection>(&admitted)) return send_json(res, rej->status, rej->body);
      accepted(res, queue_.submit({std::get<ScenarioSpec>(std::move(admitted)), fuzz}));
    });

    server_.Get(R"(/api/v1/tasks/([0-9a-zA-Z_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto rec = queue_.get(req.matches[1]);
      if (!rec) return send_json(res, 404, {{"error", "unknown task"}});
      send_json(res, 200, rec->to_json());
    });

    server_.Get(R"(/api/v1/tasks/([0-9a-zA-Z_-]+)/report)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      auto rec = queue_.get(id);
      if (!rec) return send_json(res, 404, {{"error", "unknown task"}});
      switch (rec->status) {
        case TaskStatus::Queued:
        case TaskStatus::Running:
          return send_json(res, 409, {{"error", "task not finished"}, {"status", to_string(rec->status)}});
        case TaskStatus::Failed:
          return send_json(res, 410, {{"error", rec->error}, {"status", "failed"}});
        case TaskStatus::Done: break;
      }
      auto bytes = queue_.report_bytes(id);
      if (!bytes) return send_json(res, 500, {{"error", "report missing"}});
      res.status = 200;
      res.set_content(*bytes, "application/json");
    });
  }

  ServiceConfig cfg_;
  TaskQueue queue_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace skyrig::service
