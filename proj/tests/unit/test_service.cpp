#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include "skyrig/bench.hpp"
#include "skyrig/service.hpp"

using namespace skyrig;
using namespace skyrig::service;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SKYRIG_FIXTURES;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("skyrig_service_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

ScenarioSpec fixture(const std::string& name) {
  return *parse_scenario(read_text_file((kFixtures / "cli" / name).string())).spec;
}

TaskRecord wait_finished(const TaskQueue& q, const std::string& id) {
  for (;;) {
    auto rec = q.get(id);
    if (rec && (rec->status == TaskStatus::Done || rec->status == TaskStatus::Failed)) return *rec;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

}  // namespace

TEST(TaskQueue, FifoCompletionOrder) {
  const fs::path dir = scratch("fifo");
  {
    TaskQueue q(dir, 1);
    std::vector<std::string> ids;
    ids.push_back(q.submit({bench_scenario(5, 20, 0.02), std::nullopt}));
    for (int i = 0; i < 4; ++i) ids.push_back(q.submit({fixture("pass.json"), std::nullopt}));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const TaskRecord rec = wait_finished(q, ids[i]);
      EXPECT_EQ(rec.status, TaskStatus::Done);
      EXPECT_EQ(rec.completion_index, i);
      ASSERT_EQ(rec.history.size(), 3u);
      EXPECT_EQ(rec.history[0].status, TaskStatus::Queued);
      EXPECT_EQ(rec.history[1].status, TaskStatus::Running);
      EXPECT_EQ(rec.history[2].status, TaskStatus::Done);
      EXPECT_LE(rec.history[0].at, rec.history[1].at);
      EXPECT_LE(rec.history[1].at, rec.history[2].at);
    }
  }
  fs::remove_all(dir);
}

TEST(TaskQueue, FailedTaskAndRestart) {
  const fs::path dir = scratch("restart");
  std::string done_id, failed_id;
  std::string bytes;
  {
    TaskQueue q(dir, 1);
    ScenarioSpec broken = fixture("pass.json");
    broken.environment.map = (dir / "missing_map.json").string();
    failed_id = q.submit({broken, std::nullopt});
    done_id = q.submit({fixture("pass.json"), std::nullopt});
    EXPECT_EQ(wait_finished(q, failed_id).status, TaskStatus::Failed);
    EXPECT_FALSE(q.get(failed_id)->error.empty());
    EXPECT_FALSE(q.report_bytes(failed_id));
    wait_finished(q, done_id);
    bytes = *q.report_bytes(done_id);
  }
  TaskQueue again(dir, 1);
  EXPECT_EQ(again.get(done_id)->status, TaskStatus::Done);
  EXPECT_EQ(*again.report_bytes(done_id), bytes);
  EXPECT_EQ(again.get(failed_id)->status, TaskStatus::Failed);
  again.shutdown();
  fs::remove_all(dir);
}

TEST(Service, HttpLifecycle) {
  const fs::path dir = scratch("http");
  ServiceConfig cfg;
  cfg.port = 0;
  cfg.data_dir = dir;
  Service svc(cfg);
  ASSERT_GT(svc.bind(), 0);
  svc.start_background();
  httplib::Client cli("127.0.0.1", svc.port());

  auto health = cli.Get("/api/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);

  EXPECT_EQ(cli.Get("/api/v1/tasks/nope")->status, 404);
  EXPECT_EQ(cli.Get("/api/v1/tasks/nope/report")->status, 404);

  auto bad = cli.Post("/api/v1/simulations", R"({"format_version": 1,)", "application/json");
  EXPECT_EQ(bad->status, 400);
  auto unknown = cli.Post("/api/v1/simulations", read_text_file((kFixtures / "cli/error_unknown_field.json").string()),
                          "application/json");
  EXPECT_EQ(unknown->status, 400);
  EXPECT_EQ(nlohmann::json::parse(unknown->body)["errors"][0]["path"], "environment.windspeed");
  auto semantic = cli.Post("/api/v1/simulations", read_text_file((kFixtures / "invalid/home_inside_obstacle.json").string()),
                           "application/json");
  EXPECT_EQ(semantic->status, 422);

  // A long task first, so the second one is observably queued.
  const std::string slow = scenario_to_json(bench_scenario(20, 300, 0.02)).dump();
  auto first = cli.Post("/api/v1/simulations", slow, "application/json");
  ASSERT_EQ(first->status, 202);
  auto second = cli.Post("/api/v1/simulations", read_text_file((kFixtures / "cli/pass.json").string()), "application/json");
  ASSERT_EQ(second->status, 202);
  const std::string id = nlohmann::json::parse(second->body)["task_id"];
  auto early = cli.Get("/api/v1/tasks/" + id + "/report");
  EXPECT_EQ(early->status, 409);

  for (;;) {
    auto t = cli.Get("/api/v1/tasks/" + id);
    if (nlohmann::json::parse(t->body)["status"] == "done") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  auto r1 = cli.Get("/api/v1/tasks/" + id + "/report");
  auto r2 = cli.Get("/api/v1/tasks/" + id + "/report");
  ASSERT_EQ(r1->status, 200);
  EXPECT_EQ(r1->body, r2->body);
  EXPECT_EQ(nlohmann::json::parse(r1->body)["run"]["termination"], "completed");

  nlohmann::json campaign{{"scenario", nlohmann::json::parse(read_text_file((kFixtures / "cli/pass.json").string()))},
                          {"campaign", {{"parameters", {{{"target", "wind.speed_mps"}, {"range", {3, 1}}}}}, {"n_variants", 2}}}};
  auto bad_campaign = cli.Post("/api/v1/campaigns", campaign.dump(), "application/json");
  EXPECT_EQ(bad_campaign->status, 400);
  EXPECT_EQ(nlohmann::json::parse(bad_campaign->body)["errors"][0]["path"], "campaign");

  svc.stop();
  fs::remove_all(dir);
}
