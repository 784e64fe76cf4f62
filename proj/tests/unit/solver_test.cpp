// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>

#include "ssv/error.hpp"
#include "ssv/oracle.hpp"
#include "ssv/smt.hpp"
#include "support/fixtures.hpp"

using namespace ssv;
using ssv::testing::fixture;

namespace {

std::set<OptionLabel> labels(const std::string& s) {
  std::set<OptionLabel> out;
  for (char c : s) out.insert(OptionLabel(c));
  return out;
}

}  // namespace

// Passing sets were computed by enumeration and cross-checked with z3.
TEST(Solver, CorpusAnswers) {
  struct Case {
    const char* file;
    const char* passing;
  };
  const Case cases[] = {{"technicians.ssv", "C"},      {"technicians_exists.ssv", "ACD"},
                        {"technicians_must.ssv", "C"}, {"technicians_must_flawed.ssv", "A"},
                        {"meals.ssv", "D"},            {"meals_could.ssv", "D"}};
  SmtBackend smt;
  OracleChecker oracle;
  for (const auto& c : cases) {
    const auto p = parseProgram(fixture(std::string("programs/") + c.file));
    EXPECT_EQ(executeProgram(smt, p).passing, labels(c.passing)) << c.file;
    EXPECT_EQ(executeProgram(oracle, p).passing, labels(c.passing)) << c.file;
  }
}

TEST(Solver, IntegerProgramUsesSolverOnly) {
  const auto p = parseProgram(fixture("programs/books.ssv"));
  EXPECT_FALSE(supportsProgram(*p.scope, p.fullPreconditions()));
  OracleChecker oracle;
  EXPECT_THROW(executeProgram(oracle, p), OracleError);
  SmtBackend smt;
  const auto out = executeProgram(smt, p);
  ASSERT_TRUE(out.answer.has_value());
  EXPECT_EQ(*out.answer, OptionLabel('A'));
}

TEST(Solver, ModelCounts) {
  const auto tech = parseProgram(fixture("programs/technicians.ssv"));
  EXPECT_EQ(stateSpace(*tech.scope, tech.fullPreconditions()), 262144u);
  EXPECT_EQ(countModels(*tech.scope, tech.fullPreconditions()), 24u);
  const auto meals = parseProgram(fixture("programs/meals.ssv"));
  EXPECT_EQ(countModels(*meals.scope, meals.fullPreconditions()), 7u);
}

TEST(Solver, OracleCap) {
  const auto tech = parseProgram(fixture("programs/technicians.ssv"));
  OracleOptions small;
  small.cap = 1000;
  EXPECT_THROW(oracleCheck(*tech.scope, tech.fullPreconditions(), small), OracleError);
}

TEST(Solver, ScriptShape) {
  const auto p = parseProgram(fixture("programs/technicians.ssv"));
  Query q{p.scope.get(), p.fullPreconditions()};
  const auto script = compileScript(q);
  EXPECT_NE(script.find("(declare-datatype"), std::string::npos);
  EXPECT_NE(script.find("(declare-fun"), std::string::npos);
  EXPECT_NE(script.find("(check-sat)"), std::string::npos);
  EXPECT_EQ(canonicalKey(q), canonicalKey(q));
  EXPECT_EQ(canonicalKey(q).size(), 64u);
  Query q2{p.scope.get(), {p.fullPreconditions().front()}};
  EXPECT_NE(canonicalKey(q), canonicalKey(q2));
}

TEST(Solver, CacheHitsAndPersistence) {
  const auto p = parseProgram(fixture("programs/technicians.ssv"));
  const auto path = (std::filesystem::temp_directory_path() / "ssv_solver_cache_test.json").string();
  std::filesystem::remove(path);
  {
    SmtBackend smt;
    executeProgram(smt, p);
    const auto runs = smt.solverRuns();
    EXPECT_GT(runs, 0u);
    executeProgram(smt, p);
    EXPECT_EQ(smt.solverRuns(), runs);
    EXPECT_GT(smt.cacheHits(), 0u);
    smt.saveCache(path);
  }
  SmtBackend fresh;
  fresh.loadCache(path);
  EXPECT_GT(fresh.cacheSize(), 0u);
  EXPECT_EQ(executeProgram(fresh, p).passing, labels("C"));
  EXPECT_EQ(fresh.solverRuns(), 0u);
  std::filesystem::remove(path);
}

TEST(Solver, MissingSolverIsAnError) {
  const auto p = parseProgram(fixture("programs/meals.ssv"));
  SmtBackend smt(SmtOptions{"/nonexistent/solver -in"});
  EXPECT_THROW(checkSat(smt, *p.scope, p.fullPreconditions(), {}), SolverError);
}

TEST(Solver, TinyBudgetIsUnknownNotWrong) {
  const auto p = parseProgram(fixture("programs/technicians.ssv"));
  SmtBackend smt;
  const auto r = checkSat(smt, *p.scope, p.fullPreconditions(), {}, 1);
  EXPECT_NE(r.status, SatStatus::Unsat);
}
