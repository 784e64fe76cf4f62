// SPDX-License-Identifier: Apache-2.0
//
// One line per acceptance criterion; exits non-zero if any fails.
#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ssv/harness.hpp"
#include "ssv/oracle.hpp"
#include "support/fixtures.hpp"
#include "support/random_program.hpp"

using namespace ssv;
using ssv::testing::fixture;
using ssv::testing::fixturePath;

namespace {

struct Failed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failed(what);
}

std::vector<ReasoningTask> dataset() { return loadDataset(fixturePath("dataset/tasks.jsonl")); }

ReasoningTask taskById(const std::string& id) {
  for (auto& t : dataset())
    if (t.id == id) return t;
  throw Failed("no task " + id);
}

SsvConfig replayConfig() { return SsvConfig::fromFile(fixturePath("dataset/config.json")); }

SsvResult replay(const std::string& id, const std::function<void(SsvConfig&)>& tweak = {}) {
  auto cfg = replayConfig();
  if (tweak) tweak(cfg);
  auto llm = makeGateway(cfg);
  SmtBackend smt;
  Pipeline p(cfg, *llm, smt);
  return p.run(taskById(id));
}

std::string label(const std::optional<OptionLabel>& l) { return l ? l->str() : "none"; }

// ---- 1 ------------------------------------------------------------------------

std::string oracleEquivalence() {
  constexpr int kPrograms = 240;
  const auto start = std::chrono::steady_clock::now();
  ssv::testing::RandomProgramGen gen(20240611);
  std::vector<std::string> sources;
  for (int i = 0; i < kPrograms; ++i) sources.push_back(gen.next());

  OracleChecker oracle;
  SmtBackend smt;
  std::atomic<int> next{0}, checks{0}, sat{0};
  std::mutex mu;
  std::vector<std::string> mismatches;
  auto work = [&] {
    for (int i; (i = next.fetch_add(1)) < kPrograms;) {
      const auto p = parseProgram(sources[i]);
      const auto& s = *p.scope;
      std::vector<std::pair<std::vector<Expr>, std::vector<Expr>>> qs;
      qs.push_back({p.fullPreconditions(), {}});
      for (const auto& c : p.constraints) qs.push_back({p.init.preconditions, c.exprs});
      for (const auto& o : p.options) {
        qs.push_back({p.fullPreconditions(), {o.checkExpr}});
        qs.push_back({p.fullPreconditions(), {mkNot(o.checkExpr)}});
      }
      for (const auto& [pre, extra] : qs) {
        const auto a = checkSat(oracle, s, pre, extra).status;
        const auto b = checkSat(smt, s, pre, extra).status;
        ++checks;
        if (a == SatStatus::Sat) ++sat;
        if (a != b) {
          std::lock_guard lk(mu);
          mismatches.push_back("program " + std::to_string(i) + ": oracle " + statusName(a) + ", solver " + statusName(b));
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::max(2u, std::min(8u, std::thread::hardware_concurrency())); ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require(mismatches.empty(), mismatches.empty() ? "" : mismatches.front());
  require(sat > 0 && sat < checks, "degenerate sample");
  require(secs < 300, "took " + std::to_string(secs) + " s");
  std::ostringstream o;
  o << kPrograms << " programs, " << checks << " checks (" << sat << " sat), 0 mismatches, " << static_cast<int>(secs)
    << " s";
  return o.str();
}

// ---- 2 ------------------------------------------------------------------------

std::string stacy_yolanda() {
  SmtBackend smt;
  const auto wrong = parseProgram(fixture("programs/technicians_exists.ssv"));
  const auto right = parseProgram(fixture("programs/technicians.ssv"));
  const auto text = fixture("instantiations/stacy_yolanda.json");
  const auto vw = verifyInstantiations(smt, wrong, instantiationsFromJson(wrong, text));
  require(!vw.pass && vw.reason == FailReason::NegSat, "Exists variant should fail with NegSat");
  require(vw.failing && vw.failing->polarity == Polarity::Negative &&
              vw.failing->description == "Stacy and Yolanda both repair TVs.",
          "wrong failing instantiation");
  require(vw.checks[0].status == SatStatus::Sat, "positive example should hold for the Exists variant");
  const auto vr = verifyInstantiations(smt, right, instantiationsFromJson(right, text));
  require(vr.pass, "ForAll variant should pass both instantiations");
  require(vr.checks.size() == 2 && vr.checks[0].status == SatStatus::Sat && vr.checks[1].status == SatStatus::Unsat,
          "ForAll variant statuses");
  return "Exists variant fails on the negative example (NegSat); ForAll variant passes both";
}

// ---- 3 ------------------------------------------------------------------------

std::string technicians() {
  const auto p = parseProgram(fixture("programs/technicians.ssv"));
  SmtBackend smt;
  const auto out = executeProgram(smt, p);
  require(out.answer == OptionLabel('C') && out.passing.size() == 1, "solver answer " + label(out.answer));
  const auto pre = p.fullPreconditions();
  for (const auto& o : p.options) {
    auto exprs = pre;
    exprs.push_back(o.checkExpr);
    const bool sat = oracleCheck(*p.scope, exprs) == SatStatus::Sat;
    require(sat == (o.label == OptionLabel('C')), "oracle disagrees on option " + o.label.str());
  }
  const auto r = replay("tech-pairs");
  require(r.answer == OptionLabel('C') && r.verified && r.trace.repairsUsed == 1,
          "replay gave " + label(r.answer) + " verified=" + std::to_string(r.verified));
  return "solver and oracle both single out C; replay returns (C, verified) after 1 repair";
}

// ---- 4 ------------------------------------------------------------------------

std::string metrics() {
  RunMetrics m;
  m.total = 230;
  m.correct = 164;
  m.verified = 50;
  m.verifiedCorrect = 50;
  require(m.accuracyText() == "71.3" && m.coverageText() == "21.7" && m.precisionText() == "100.0",
          m.accuracyText() + "/" + m.coverageText() + "/" + m.precisionText());
  RunMetrics none;
  none.total = 230;
  none.correct = 120;
  require(none.precisionText() == "-", "precision with nothing verified printed " + none.precisionText());
  return "230/164/50/50 -> 71.3 / 21.7 / 100.0; no verified tasks -> precision \"-\"";
}

// ---- 5 ------------------------------------------------------------------------

std::string algorithm() {
  const auto r0 = replay("tech-must", [](SsvConfig& c) { c.maxRepairs = 0; });
  require(r0.answer == OptionLabel('A') && !r0.verified && r0.trace.repairsUsed == 0,
          "maxRepairs=0 gave " + label(r0.answer));
  const auto r2 = replay("tech-must");
  require(r2.answer == OptionLabel('C') && r2.verified && r2.trace.repairsUsed == 1,
          "maxRepairs=2 gave " + label(r2.answer));

  const auto books = replay("books-order");
  require(books.verified && books.trace.temperatureUsed == 0.3, "books not verified at 0.3");

  const auto bear = replay("bear-fallback");
  require(bear.trace.usedFallback && !bear.verified && !bear.trace.programProduced, "fallback not used");
  const auto noAnswer = replay("tech-pairs", [](SsvConfig& c) {
    c.maxRepairs = 0;
    c.temperatures = {0.0};
  });
  require(!noAnswer.answer && !noAnswer.trace.usedFallback, "fallback fired although a program parsed");

  auto cfg = replayConfig();
  auto llm = makeGateway(cfg);
  SmtBackend smt;
  for (const auto& rec : evaluate(dataset(), cfg, *llm, smt).records)
    require(rec.usedFallback == !rec.programProduced && (!rec.usedFallback || !rec.verified),
            "fallback invariant broken on " + rec.taskId);
  return "maxRepairs 0 -> (A, unverified), 2 -> (C, verified, 1 repair); temperatureUsed 0.3; fallback only "
         "without a program";
}

// ---- 6 ------------------------------------------------------------------------

std::string wellFormedness() {
  const std::string base = R"(#INIT: three lamps
enum lamp { red, green, blue }
list lamps = [red, green, blue]
fn on(lamp) -> Bool

#CONSTRAINT: exactly one lamp is on
assert Sum([on(l) for l in lamps]) == 1

#CONSTRAINT: seeded
SEED

#OPTION A: red
check on(red)
#OPTION B: green
check on(green)
#OPTION C: blue
check on(blue)
)";
  auto seeded = [&](const std::string& code) {
    std::string s = base;
    s.replace(s.find("SEED"), 4, code);
    return parseProgram(s);
  };
  SmtBackend smt;
  auto flagged = [&](const SegmentedProgram& p, Degeneracy d) {
    const auto wf = isWellFormed(smt, p, executeProgram(smt, p));
    for (const auto& x : wf.degenerate)
      if (x.index == 1 && x.flag == d) return !wf.ok();
    return false;
  };
  require(flagged(seeded("assert Or(on(red), Not(on(red)))"), Degeneracy::Tautology), "tautology missed");
  require(flagged(seeded("assert And(on(red), Not(on(red)))"), Degeneracy::Contradiction), "contradiction missed");
  require(flagged(seeded("assert ForAll([l: lamp], Implies(And(l == red, l == blue), on(l)))"),
                  Degeneracy::VacuousImplication),
          "vacuous implication missed");
  const auto two = seeded("assert Not(on(red))");
  const auto outTwo = executeProgram(smt, two);
  const auto wfTwo = isWellFormed(smt, two, outTwo);
  require(outTwo.passing.size() == 2 && !wfTwo.singleAnswerOk && wfTwo.degenerate.empty(), "two-answer program");

  const auto race = replay("race-tautology", [](SsvConfig& c) {
    c.maxRepairs = 0;
    c.temperatures = {0.0};
  });
  require(!race.verified, "tautological program returned verified");
  for (const auto& id : {"tech-pairs", "race-tautology", "books-order", "teams-wrong", "lamps-illformed"}) {
    for (const auto& a : replay(id).trace.attempts)
      require(a.wellFormed.ok() || !a.verified, std::string("flagged attempt marked verified in ") + id);
  }
  return "tautology, contradiction and vacuous implication flagged; two passing options fail singleAnswerOk; no "
         "flagged attempt verified";
}

// ---- 7 ------------------------------------------------------------------------

std::string determinism() {
  std::string first;
  for (unsigned par : {1u, 4u, 16u}) {
    auto cfg = replayConfig();
    cfg.parallelism = par;
    cfg.checkWorkers = std::min(4u, par);
    cfg.parallelTemperatures = par > 1;
    auto llm = makeGateway(cfg);
    SmtBackend smt;
    const auto ev = evaluate(dataset(), cfg, *llm, smt);
    const auto json = reportToJson(ev.records, ev.metrics);
    const auto csv = reportToCsv(ev.records, ev.metrics);
    if (first.empty()) first = json + csv;
    require(json + csv == first, "report differs at parallelism " + std::to_string(par));
  }
  require(first.rfind(fixture("dataset/expected_report.json"), 0) == 0, "report differs from the frozen golden");
  return "reports byte-identical at parallelism 1, 4 and 16 and equal to the golden report";
}

// ---- 8 ------------------------------------------------------------------------

std::string conservativeness() {
  auto cfg = replayConfig();
  cfg.provider.mode = "scripted";
  cfg.provider.script = fixturePath("dataset/script.json");
  cfg.checkTimeoutMs = 1;
  auto llm = makeGateway(cfg);
  SmtBackend smt;  // fresh, nothing cached
  Pipeline pipeline(cfg, *llm, smt);
  int affected = 0, timeouts = 0;
  for (const auto& task : dataset()) {
    const auto r = pipeline.run(task);
    require(!r.verified, task.id + " verified under a 1 ms budget");
    for (const auto& a : r.trace.attempts) {
      bool unknown = false;
      for (const auto& c : a.verification.checks) unknown |= !c.skipped && c.status == SatStatus::Unknown;
      if (!unknown) continue;
      ++affected;
      require(!a.verification.pass && !a.verified, "an undecided verification passed in " + task.id);
      if (a.verification.reason == FailReason::Timeout) ++timeouts;
    }
  }
  const auto p = parseProgram(fixture("programs/technicians.ssv"));
  const auto v = verifyInstantiations(smt, p, parseInstantiations(fixture("instantiations/technicians.txt"), p), 1);
  bool unknown = false;
  for (const auto& c : v.checks) unknown |= c.status == SatStatus::Unknown;
  require(!unknown || (!v.pass && v.reason == FailReason::Timeout), "technicians verification passed at 1 ms");
  require(affected > 0, "no verification hit the budget; the check is vacuous");
  return std::to_string(affected) + " affected verifications all failed (" + std::to_string(timeouts) +
         " Timeout); no task verified";
}

// ---- 9 ------------------------------------------------------------------------

std::string parsers() {
  const std::string r = "responses/";
  int n = 0;
  for (const auto* f : {"decompose_eagle.txt", "decompose_meals.txt", "decompose_technicians.txt"}) {
    require(!parseDecomposition(fixture(r + f)).constraints.empty(), f);
    ++n;
  }
  for (const auto* f : {"instantiations_creature.txt", "instantiations_meals.txt", "instantiations_technicians.txt"}) {
    require(!parseInstantiationBlocks(fixture(r + f)).empty(), f);
    ++n;
  }
  const auto refined = parseRefinedProgram(fixture(r + "refine_meals.txt"));
  parseProgram(refined + "\n" + fixture(r + "options_meals.txt"));
  ++n;
  for (const auto* f : {"repair_meals.txt", "repair_technicians.txt"}) {
    require(parseRepairPatch(fixture(r + f)).usable(), f);
    ++n;
  }
  const auto tech = parseProgram(fixture("programs/technicians.ssv"));
  parseProgram(printInit(tech) + "\n" + printConstraint(tech, 0) + "\n" + fixture(r + "options_technicians.txt"));
  ++n;

  int programs = 0;
  std::vector<std::filesystem::path> corpus;
  for (const auto& e : std::filesystem::directory_iterator(fixturePath("programs"))) corpus.push_back(e.path());
  for (const auto& e : std::filesystem::directory_iterator(fixturePath("dataset/responses")))
    if (e.path().filename().string().find("_direct") != std::string::npos) corpus.push_back(e.path());
  for (const auto& path : corpus) {
    SegmentedProgram p;
    try {
      p = parseProgram(readFile(path.string()));
    } catch (const DslError&) {
      continue;  // deliberately broken responses
    }
    const auto printed = printProgram(p);
    const auto again = parseProgram(printed);
    require(equal(p, again) && printProgram(again) == printed, "round trip failed for " + path.filename().string());
    ++programs;
  }
  require(programs >= 12, "corpus too small");
  return std::to_string(n) + " sample responses parse; " + std::to_string(programs) + " corpus programs round-trip";
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<std::string()>> criteria[] = {
      {"oracle equivalence", oracleEquivalence},
      {"instantiation regression (technicians)", stacy_yolanda},
      {"technicians end to end", technicians},
      {"metric arithmetic", metrics},
      {"algorithm conformance", algorithm},
      {"well-formedness", wellFormedness},
      {"determinism", determinism},
      {"conservative timeouts", conservativeness},
      {"parser robustness", parsers},
  };
  int failed = 0, i = 0;
  for (const auto& [name, fn] : criteria) {
    ++i;
    std::string detail;
    bool ok = false;
    try {
      detail = fn();
      ok = true;
    } catch (const std::exception& e) {
      detail = e.what();
    }
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << i << " " << name << ": " << detail << std::endl;
  }
  return failed ? 1 : 0;
}
