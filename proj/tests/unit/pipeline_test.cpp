// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <json.hpp>

#include "ssv/error.hpp"
#include "ssv/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace ssv;
using ssv::testing::fixture;
using ssv::testing::fixturePath;

namespace {

std::vector<ReasoningTask> dataset() { return loadDataset(fixturePath("dataset/tasks.jsonl")); }

ReasoningTask taskById(const std::string& id) {
  for (auto& t : dataset())
    if (t.id == id) return t;
  throw std::runtime_error("no task " + id);
}

struct Rig {
  explicit Rig(SsvConfig c = {}) : cfg(std::move(c)) {
    cfg.provider.mode = "scripted";
    cfg.provider.script = fixturePath("dataset/script.json");
    llm = makeGateway(cfg);
  }
  SsvResult run(const std::string& id) {
    Pipeline p(cfg, *llm, smt);
    return p.run(taskById(id));
  }
  SsvConfig cfg;
  std::shared_ptr<LlmGateway> llm;
  SmtBackend smt;
};

SsvConfig withRepairs(int n) {
  SsvConfig c;
  c.maxRepairs = n;
  return c;
}

}  // namespace

TEST(Config, Defaults) {
  SsvConfig c;
  EXPECT_EQ(c.temperatures, (std::vector<double>{0.0, 0.3, 0.4, 0.5}));
  EXPECT_EQ(c.maxRepairs, 2);
  EXPECT_EQ(c.repairPolicy, RepairPolicy::OnVerificationFailure);
  EXPECT_EQ(c.callsPerTemperature(), 3 + 29 + 1 + 4);
  EXPECT_EQ(c.callBudget(), 4 * 37 + 1);
}

TEST(Config, JsonKeysAndAliases) {
  auto c = SsvConfig::fromJson(R"({"maxRepairs": 0, "temperatures": [0], "repair_policy": "on_missing_answer",
                                   "provider": "scripted"})");
  EXPECT_EQ(c.maxRepairs, 0);
  EXPECT_EQ(c.repairPolicy, RepairPolicy::OnMissingAnswer);
  EXPECT_EQ(c.provider.mode, "scripted");
  c = SsvConfig::fromJson(R"({"provider": {"mode": "record", "transcripts": "t.json", "maxInFlight": 2}})");
  EXPECT_EQ(c.provider.mode, "record");
  EXPECT_EQ(c.provider.maxInFlight, 2u);
  const auto back = SsvConfig::fromJson(c.toJson());
  EXPECT_EQ(back.toJson(), c.toJson());
}

TEST(Config, Rejections) {
  EXPECT_THROW(SsvConfig::fromJson("[]"), ConfigError);
  EXPECT_THROW(SsvConfig::fromJson(R"({"maxRepair": 1})"), ConfigError);
  EXPECT_THROW(SsvConfig::fromJson(R"({"maxRepairs": -1})"), ConfigError);
  EXPECT_THROW(SsvConfig::fromJson(R"({"temperatures": []})"), ConfigError);
  EXPECT_THROW(SsvConfig::fromJson(R"({"temperatures": [1.5]})"), ConfigError);
  EXPECT_THROW(SsvConfig::fromJson(R"({"maxRepairs": "two"})"), ConfigError);
  EXPECT_THROW(SsvConfig::fromJson(R"({"provider": "carrier-pigeon"})"), ConfigError);
  EXPECT_THROW(SsvConfig::fromJson(R"({"provider": {"mode": "replay", "color": 1}})"), ConfigError);
  EXPECT_THROW(SsvConfig::fromJson(R"({"repairPolicy": "sometimes"})"), ConfigError);
}

TEST(Config, FilePathsAreRelativeToTheFile) {
  const auto c = SsvConfig::fromFile(fixturePath("dataset/config.json"));
  EXPECT_EQ(c.provider.transcripts, fixturePath("dataset/transcripts.json"));
  EXPECT_THROW(SsvConfig::fromFile(fixturePath("dataset/nope.json")), ConfigError);
}

TEST(Config, GatewayFactory) {
  SsvConfig c;
  c.provider.mode = "replay";
  EXPECT_THROW(makeGateway(c), ConfigError);
  c.provider.transcripts = fixturePath("dataset/missing.json");
  EXPECT_THROW(makeGateway(c), ConfigError);
  c.provider.transcripts = fixturePath("dataset/transcripts.json");
  EXPECT_EQ(makeGateway(c)->mode(), TranscriptMode::Replay);
  c.provider.mode = "scripted";
  c.provider.script.clear();
  EXPECT_THROW(makeGateway(c), ConfigError);
}

TEST(Budget, SpendsUpToTheLimit) {
  CallBudget b(2);
  b.spend(PromptKind::Decompose);
  b.spend(PromptKind::Decompose);
  try {
    b.spend(PromptKind::CotFallback);
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.kind(), LlmError::Kind::BudgetExceeded);
  }
  EXPECT_EQ(b.used(), 2);
}

TEST(Pipeline, RepairFixesExistsQuantifier) {
  Rig rig;
  const auto r = rig.run("tech-pairs");
  ASSERT_TRUE(r.answer.has_value());
  EXPECT_EQ(*r.answer, OptionLabel('C'));
  EXPECT_TRUE(r.verified);
  EXPECT_EQ(r.trace.repairsUsed, 1);
  EXPECT_EQ(r.trace.temperatureUsed, 0.0);
  ASSERT_EQ(r.trace.attempts.size(), 2u);
  EXPECT_EQ(r.trace.attempts[0].verification.reason, FailReason::NegSat);
  EXPECT_TRUE(r.trace.attempts[1].verified);
  EXPECT_NE(r.program.find("ForAll([m: machines_sort], Implies(repairs(Yolanda, m)"), std::string::npos);
}

TEST(Pipeline, MaxRepairsZeroKeepsFirstAnswer) {
  Rig rig(withRepairs(0));
  const auto r = rig.run("tech-must");
  ASSERT_TRUE(r.answer.has_value());
  EXPECT_EQ(*r.answer, OptionLabel('A'));
  EXPECT_FALSE(r.verified);
  EXPECT_EQ(r.trace.repairsUsed, 0);
  EXPECT_EQ(r.trace.temperatureUsed, 0.0);
}

TEST(Pipeline, RepairedCountingConstraint) {
  Rig rig;
  const auto r = rig.run("tech-must");
  EXPECT_EQ(r.answer, OptionLabel('C'));
  EXPECT_TRUE(r.verified);
  EXPECT_EQ(r.trace.repairsUsed, 1);
  EXPECT_EQ(r.trace.attempts[0].verification.reason, FailReason::PosUnsat);
}

TEST(Pipeline, OnMissingAnswerPolicySkipsRepair) {
  SsvConfig c;
  c.repairPolicy = RepairPolicy::OnMissingAnswer;
  Rig rig(c);
  const auto r = rig.run("tech-must");
  EXPECT_EQ(r.answer, OptionLabel('A'));
  EXPECT_FALSE(r.verified);
  EXPECT_EQ(r.trace.repairsUsed, 0);
}

TEST(Pipeline, SecondTemperatureVerifies) {
  Rig rig;
  const auto r = rig.run("books-order");
  EXPECT_EQ(r.answer, OptionLabel('A'));
  EXPECT_TRUE(r.verified);
  EXPECT_EQ(r.trace.temperatureUsed, 0.3);
  // The first temperature answered E and kept it as a candidate.
  EXPECT_EQ(r.trace.attempts.front().answer, OptionLabel('E'));
}

TEST(Pipeline, SingleTemperatureReturnsUnverifiedCandidate) {
  SsvConfig c;
  c.temperatures = {0.0};
  Rig rig(c);
  const auto r = rig.run("books-order");
  EXPECT_EQ(r.answer, OptionLabel('E'));
  EXPECT_FALSE(r.verified);
}

TEST(Pipeline, FallbackOnlyWithoutAnyProgram) {
  Rig rig;
  const auto r = rig.run("bear-fallback");
  EXPECT_EQ(r.answer, OptionLabel('B'));
  EXPECT_FALSE(r.verified);
  EXPECT_TRUE(r.trace.usedFallback);
  EXPECT_FALSE(r.trace.programProduced);
  EXPECT_FALSE(r.trace.temperatureUsed.has_value());

  SsvConfig c;
  c.maxRepairs = 0;
  c.temperatures = {0.0};
  Rig noAnswer(c);
  const auto r2 = noAnswer.run("tech-pairs");  // program parses, three options pass
  EXPECT_FALSE(r2.answer.has_value());
  EXPECT_FALSE(r2.trace.usedFallback);
  EXPECT_TRUE(r2.trace.programProduced);
}

TEST(Pipeline, CompositionalGeneration) {
  Rig rig;
  const auto r = rig.run("lorpus-compose");
  EXPECT_EQ(r.answer, OptionLabel('A'));
  EXPECT_TRUE(r.verified);
  EXPECT_EQ(r.trace.llmCalls, 10);
  EXPECT_NE(r.program.find("#CONSTRAINT: Each gorpus is fast."), std::string::npos);
}

TEST(Pipeline, ErrorRefinement) {
  Rig rig;
  const auto r = rig.run("meals-could");
  EXPECT_EQ(r.answer, OptionLabel('D'));
  EXPECT_TRUE(r.verified);
  EXPECT_EQ(r.trace.llmCalls, 3);
}

TEST(Pipeline, TautologyIsRepaired) {
  Rig rig;
  const auto r = rig.run("race-tautology");
  EXPECT_EQ(r.answer, OptionLabel('B'));
  EXPECT_TRUE(r.verified);
  const auto& first = r.trace.attempts.front();
  EXPECT_TRUE(first.verification.pass);
  ASSERT_FALSE(first.wellFormed.degenerate.empty());
  EXPECT_EQ(first.wellFormed.degenerate[0].flag, Degeneracy::Tautology);
  EXPECT_FALSE(first.verified);
}

TEST(Pipeline, UnchangedRepairStopsTheLoop) {
  Rig rig;
  const auto r = rig.run("teams-wrong");
  EXPECT_EQ(r.answer, OptionLabel('B'));
  EXPECT_FALSE(r.verified);
  for (const auto& a : r.trace.attempts) EXPECT_EQ(a.repairIndex, 0);
}

TEST(Pipeline, IllFormedExampleBlocksVerification) {
  Rig rig;
  const auto r = rig.run("lamps-illformed");
  EXPECT_EQ(r.answer, OptionLabel('C'));
  EXPECT_FALSE(r.verified);
  EXPECT_EQ(r.trace.attempts.front().verification.reason, FailReason::IllFormedExample);
}

TEST(Pipeline, ParallelTemperaturesMatchSequential) {
  SsvConfig par;
  par.parallelTemperatures = true;
  Rig a, b(par);
  for (const auto& id : {"tech-pairs", "books-order", "bear-fallback", "teams-wrong"}) {
    EXPECT_EQ(resultToJson(a.run(id)), resultToJson(b.run(id))) << id;
  }
}

TEST(Pipeline, CallBudgetIsHonored) {
  SsvConfig c;
  c.temperatures = {0.0};
  Rig rig(c);
  Pipeline p(rig.cfg, *rig.llm, rig.smt);
  CallBudget tight(0);
  EXPECT_THROW(p.genProgram(taskById("zimpus-direct"), 0.0, tight), LlmError);
  CallBudget one(1);
  EXPECT_TRUE(p.genProgram(taskById("zimpus-direct"), 0.0, one).has_value());
}

TEST(Pipeline, ResultJson) {
  Rig rig;
  const auto j = nlohmann::json::parse(resultToJson(rig.run("zimpus-direct")));
  EXPECT_EQ(j["answer"], "B");
  EXPECT_EQ(j["verified"], true);
  EXPECT_EQ(j["trace"]["llmCalls"], 2);
  EXPECT_TRUE(j["program"].is_string());
}
