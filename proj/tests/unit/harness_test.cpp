// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <json.hpp>

#include "ssv/error.hpp"
#include "ssv/harness.hpp"
#include "support/fixtures.hpp"

using namespace ssv;
using ssv::testing::fixture;
using ssv::testing::fixturePath;

namespace {

RunMetrics counts(long long total, long long correct, long long verified, long long verifiedCorrect) {
  RunMetrics m;
  m.total = total;
  m.correct = correct;
  m.verified = verified;
  m.verifiedCorrect = verifiedCorrect;
  return m;
}

TaskRecord rec(const char* id, std::optional<char> ans, char gold, bool verified, bool fallback = false) {
  TaskRecord r;
  r.taskId = id;
  if (ans) r.answer = OptionLabel(*ans);
  r.gold = OptionLabel(gold);
  r.correct = ans && *ans == gold;
  r.verified = verified;
  r.usedFallback = fallback;
  r.programProduced = !fallback;
  return r;
}

Evaluation replayEval(unsigned parallelism) {
  auto cfg = SsvConfig::fromFile(fixturePath("dataset/config.json"));
  cfg.parallelism = parallelism;
  auto llm = makeGateway(cfg);
  SmtBackend smt;
  return evaluate(loadDataset(fixturePath("dataset/tasks.jsonl")), cfg, *llm, smt);
}

}  // namespace

TEST(Metrics, PercentRounding) {
  EXPECT_EQ(formatPercent(164, 230), "71.3");
  EXPECT_EQ(formatPercent(50, 230), "21.7");
  EXPECT_EQ(formatPercent(50, 50), "100.0");
  EXPECT_EQ(formatPercent(0, 0), "-");
  EXPECT_EQ(formatPercent(1, 3), "33.3");
  EXPECT_EQ(formatPercent(2, 3), "66.7");
  EXPECT_EQ(formatPercent(1, 8), "12.5");  // half rounds up
  EXPECT_EQ(formatPercent(0, 7), "0.0");
}

TEST(Metrics, TableRow) {
  const auto m = counts(230, 164, 50, 50);
  EXPECT_EQ(m.accuracyText(), "71.3");
  EXPECT_EQ(m.coverageText(), "21.7");
  EXPECT_EQ(m.precisionText(), "100.0");
  EXPECT_NEAR(m.generalAccuracy(), 71.304, 1e-3);
  const auto none = counts(230, 120, 0, 0);
  EXPECT_EQ(none.precisionText(), "-");
  EXPECT_FALSE(none.precision().has_value());
}

TEST(Metrics, FromRecords) {
  const std::vector<TaskRecord> rs{rec("a", 'A', 'A', true), rec("b", 'B', 'A', false), rec("c", std::nullopt, 'C', false),
                                   rec("d", 'D', 'D', false, true)};
  const auto m = computeMetrics(rs);
  EXPECT_EQ(m.total, 4);
  EXPECT_EQ(m.correct, 2);
  EXPECT_EQ(m.verified, 1);
  EXPECT_EQ(m.verifiedCorrect, 1);
  EXPECT_EQ(m.programTasks, 3);
  EXPECT_EQ(m.programCorrect, 1);
  EXPECT_EQ(m.programAccuracyText(), "33.3");
}

TEST(Reports, CsvAndJsonShapes) {
  const std::vector<TaskRecord> rs{rec("a,1", 'A', 'A', true), rec("b", std::nullopt, 'B', false)};
  const auto m = computeMetrics(rs);
  const auto csv = reportToCsv(rs, m);
  EXPECT_EQ(csv.rfind("task_id,answer,gold,", 0), 0u);
  EXPECT_NE(csv.find("\"a,1\",A,A,1,1"), std::string::npos);
  EXPECT_NE(csv.find("#metrics,total=2,accuracy=50.0,coverage=50.0,precision=100.0"), std::string::npos);
  const auto j = nlohmann::json::parse(reportToJson(rs, m));
  EXPECT_EQ(j["metrics"]["counts"]["total"], 2);
  EXPECT_TRUE(j["records"][1]["answer"].is_null());
  EXPECT_EQ(j["metrics"]["generalAccuracy"], "50.0");
}

TEST(Reports, ReadBack) {
  const auto path = (std::filesystem::temp_directory_path() / "ssv_report_rt.json").string();
  const std::vector<TaskRecord> rs{rec("a", 'A', 'A', true), rec("b", 'C', 'B', false, true)};
  writeReport(rs, computeMetrics(rs), path, ReportFormat::Json);
  const auto back = readReport(path);
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_TRUE(back.records[1].sameOutcome(rs[1]));
  EXPECT_EQ(back.metrics, computeMetrics(rs));
  std::filesystem::remove(path);
}

TEST(Reports, Timings) {
  std::vector<TaskRecord> rs(4);
  for (int i = 0; i < 4; ++i) {
    rs[i].taskId = "t" + std::to_string(i);
    rs[i].timingMs = 10.0 * (i + 1);
  }
  const auto j = nlohmann::json::parse(timingsToJson(rs));
  EXPECT_DOUBLE_EQ(j["median"].get<double>(), 25.0);
  EXPECT_DOUBLE_EQ(j["q1"].get<double>(), 17.5);
  EXPECT_DOUBLE_EQ(j["q3"].get<double>(), 32.5);
}

TEST(Ablation, GridParsing) {
  SsvConfig base;
  const auto g = AblationGrid::fromJson(R"({"maxRepairs": [0, 2], "temperaturePrefixes": [1, 4]})", base);
  EXPECT_EQ(g.maxRepairs, (std::vector<int>{0, 2}));
  ASSERT_EQ(g.temperatures.size(), 2u);
  EXPECT_EQ(g.temperatures[0], std::vector<double>{0.0});
  EXPECT_EQ(g.temperatures[1].size(), 4u);
  EXPECT_THROW(AblationGrid::fromJson("{}", base), ConfigError);
  EXPECT_THROW(AblationGrid::fromJson(R"({"temperaturePrefixes": [9]})", base), ConfigError);
  EXPECT_THROW(AblationGrid::fromJson(R"({"repairs": [1]})", base), ConfigError);
}

// Golden numbers were produced by running the scripted dataset and checking each task by hand.
TEST(Evaluation, ReplayMatchesGoldenReport) {
  const auto ev = replayEval(4);
  EXPECT_EQ(ev.metrics.total, 10);
  EXPECT_EQ(ev.metrics.correct, 9);
  EXPECT_EQ(ev.metrics.verified, 7);
  EXPECT_EQ(ev.metrics.verifiedCorrect, 7);
  EXPECT_EQ(ev.metrics.programTasks, 9);
  EXPECT_EQ(reportToJson(ev.records, ev.metrics), fixture("dataset/expected_report.json"));
}

TEST(Evaluation, AblationMatchesGolden) {
  auto cfg = SsvConfig::fromFile(fixturePath("dataset/config.json"));
  auto llm = makeGateway(cfg);
  SmtBackend smt;
  const auto grid = AblationGrid::fromJson(fixture("dataset/ablation.json"), cfg);
  const auto cells = ablationGrid(loadDataset(fixturePath("dataset/tasks.jsonl")), cfg, grid, *llm, smt);
  ASSERT_EQ(cells.size(), 9u);
  EXPECT_EQ(cells[0].metrics.accuracyText(), "50.0");
  EXPECT_EQ(cells[0].metrics.coverageText(), "30.0");
  EXPECT_EQ(ablationToJson(cells), fixture("dataset/expected_ablation.json"));
}

TEST(Evaluation, TaskErrorsAreRecorded) {
  SsvConfig cfg;
  auto llm = std::make_shared<LlmGateway>(TranscriptMode::Replay, std::make_shared<TranscriptStore>());
  SmtBackend smt;
  auto tasks = loadDataset(fixturePath("dataset/tasks.jsonl"));
  tasks.resize(2);
  const auto ev = evaluate(tasks, cfg, *llm, smt);
  for (const auto& r : ev.records) {
    EXPECT_FALSE(r.error.empty());
    EXPECT_FALSE(r.answer.has_value());
  }
  EXPECT_EQ(ev.metrics.correct, 0);
}
