// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "ssv/error.hpp"
#include "ssv/llm.hpp"
#include "ssv/oracle.hpp"
#include "ssv/verifier.hpp"
#include "support/fixtures.hpp"

using namespace ssv;
using ssv::testing::fixture;

namespace {

const char* kLamps = R"(#INIT: three lamps
enum lamp { red, green, blue }
list lamps = [red, green, blue]
fn on(lamp) -> Bool

#CONSTRAINT: exactly one lamp is on
assert Sum([on(l) for l in lamps]) == 1

#CONSTRAINT: red is off
assert Not(on(red))

#CHECK TYPE: sat
#OPTION A: red
check on(red)
#OPTION B: green
check on(green)
#OPTION C: blue
check on(blue)
)";

SegmentedProgram withConstraint(const std::string& code) {
  std::string src = kLamps;
  const auto at = src.find("#CHECK TYPE");
  src.insert(at, "#CONSTRAINT: seeded\n" + code + "\n\n");
  return parseProgram(src);
}

std::vector<Degeneracy> flagsOf(const SegmentedProgram& p, std::size_t idx) {
  OracleChecker oracle;
  return degeneracyCheck(oracle, *p.scope, p.init.preconditions, p.constraints[idx]);
}

bool has(const std::vector<Degeneracy>& v, Degeneracy d) { return std::find(v.begin(), v.end(), d) != v.end(); }

}  // namespace

TEST(Verifier, StacyYolandaExistsVariantFailsOnNegative) {
  SmtBackend smt;
  const auto wrong = parseProgram(fixture("programs/technicians_exists.ssv"));
  const auto insts = instantiationsFromJson(wrong, fixture("instantiations/stacy_yolanda.json"));
  ASSERT_EQ(insts.size(), 2u);
  const auto v = verifyInstantiations(smt, wrong, insts);
  EXPECT_FALSE(v.pass);
  ASSERT_TRUE(v.reason.has_value());
  EXPECT_EQ(*v.reason, FailReason::NegSat);
  ASSERT_TRUE(v.failing.has_value());
  EXPECT_EQ(v.failing->polarity, Polarity::Negative);
  EXPECT_EQ(v.failing->constraintIndex, 2u);
  EXPECT_EQ(v.checks[0].status, SatStatus::Sat);
}

TEST(Verifier, StacyYolandaForAllVariantPasses) {
  SmtBackend smt;
  const auto right = parseProgram(fixture("programs/technicians.ssv"));
  const auto v = verifyInstantiations(smt, right, instantiationsFromJson(right, fixture("instantiations/stacy_yolanda.json")));
  EXPECT_TRUE(v.pass);
  EXPECT_FALSE(v.failing.has_value());
  ASSERT_EQ(v.checks.size(), 2u);
  EXPECT_EQ(v.checks[1].status, SatStatus::Unsat);
}

TEST(Verifier, FullTechniciansBlocks) {
  SmtBackend smt;
  const auto p = parseProgram(fixture("programs/technicians.ssv"));
  const auto insts = parseInstantiations(fixture("instantiations/technicians.txt"), p);
  ASSERT_EQ(insts.size(), 12u);
  EXPECT_TRUE(verifyInstantiations(smt, p, insts, kDefaultBudgetMs, 4).pass);

  const auto flawed = parseProgram(fixture("programs/technicians_must_flawed.ssv"));
  const auto v = verifyInstantiations(smt, flawed, parseInstantiations(fixture("instantiations/technicians.txt"), flawed));
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.reason, FailReason::PosUnsat);
  EXPECT_EQ(v.failing->constraintIndex, 0u);
}

TEST(Verifier, WorkersDoNotChangeTheOutcome) {
  SmtBackend smt;
  const auto p = parseProgram(fixture("programs/technicians_exists.ssv"));
  const auto insts = parseInstantiations(fixture("instantiations/technicians.txt"), p);
  const auto a = verifyInstantiations(smt, p, insts, kDefaultBudgetMs, 1);
  const auto b = verifyInstantiations(smt, p, insts, kDefaultBudgetMs, 8);
  EXPECT_EQ(a.pass, b.pass);
  EXPECT_EQ(a.reason, b.reason);
  EXPECT_EQ(a.failing->code, b.failing->code);
}

TEST(Verifier, NoneIsSkippedAndUndeclaredIsIllFormed) {
  OracleChecker oracle;
  const auto p = parseProgram(kLamps);
  std::vector<Instantiation> insts{
      makeInstantiation(p, 0, Polarity::Positive, "only blue", "And(on(blue) == True, on(red) == False)"),
      makeInstantiation(p, 0, Polarity::Negative, std::nullopt, "pass"),
  };
  EXPECT_TRUE(insts[1].isNone());
  auto v = verifyInstantiations(oracle, p, insts);
  EXPECT_TRUE(v.pass);
  EXPECT_TRUE(v.checks[1].skipped);

  insts.push_back(makeInstantiation(p, 1, Polarity::Positive, "purple", "on(purple) == True"));
  EXPECT_TRUE(insts.back().illFormed);
  v = verifyInstantiations(oracle, p, insts);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.reason, FailReason::IllFormedExample);
}

TEST(Verifier, JsonInstantiationErrors) {
  const auto p = parseProgram(kLamps);
  EXPECT_THROW(instantiationsFromJson(p, "{}"), FormatError);
  EXPECT_THROW(instantiationsFromJson(p, R"([{"constraint": 9, "polarity": "positive", "code": "True"}])"),
               FormatError);
  EXPECT_THROW(instantiationsFromJson(p, R"([{"constraint": 0, "polarity": "sideways", "code": "True"}])"),
               FormatError);
}

TEST(Verifier, DegenerateConstraints) {
  EXPECT_TRUE(has(flagsOf(withConstraint("assert Or(on(red), Not(on(red)))"), 2), Degeneracy::Tautology));
  EXPECT_TRUE(has(flagsOf(withConstraint("assert And(on(green), Not(on(green)))"), 2), Degeneracy::Contradiction));
  // Nothing is both red and green, so the implication never fires.
  EXPECT_TRUE(has(flagsOf(withConstraint("assert ForAll([l: lamp], Implies(And(l == red, l == green), on(l)))"), 2),
                  Degeneracy::VacuousImplication));
  EXPECT_TRUE(flagsOf(withConstraint("assert ForAll([l: lamp], Implies(l == green, Not(on(l))))"), 2).empty());
  EXPECT_TRUE(flagsOf(parseProgram(kLamps), 0).empty());
}

TEST(Verifier, WellFormedReport) {
  OracleChecker oracle;
  const auto two = parseProgram(kLamps);  // green and blue both possible
  auto outcome = executeProgram(oracle, two);
  EXPECT_EQ(outcome.passing.size(), 2u);
  auto wf = isWellFormed(oracle, two, outcome);
  EXPECT_TRUE(wf.structureOk);
  EXPECT_FALSE(wf.singleAnswerOk);
  EXPECT_FALSE(wf.ok());

  const auto one = withConstraint("assert Not(on(green))");
  outcome = executeProgram(oracle, one);
  wf = isWellFormed(oracle, one, outcome);
  EXPECT_TRUE(wf.ok());

  const std::vector<OptionLabel> ab{OptionLabel('A'), OptionLabel('B')};
  wf = isWellFormed(oracle, one, outcome, kDefaultBudgetMs, &ab);
  EXPECT_FALSE(wf.structureOk);
  EXPECT_NE(wf.structureError.find("option C"), std::string::npos);
}

TEST(Verifier, AllNonePassesVacuously) {
  OracleChecker oracle;
  const auto p = parseProgram(kLamps);
  std::vector<Instantiation> insts;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    insts.push_back(makeInstantiation(p, i, Polarity::Positive, std::nullopt, "NONE"));
    insts.push_back(makeInstantiation(p, i, Polarity::Negative, std::nullopt, ""));
  }
  const auto v = verifyInstantiations(oracle, p, insts);
  EXPECT_TRUE(v.pass);
  for (const auto& c : v.checks) EXPECT_TRUE(c.skipped);
  EXPECT_TRUE(verifyInstantiations(oracle, p, {}).pass);
}
