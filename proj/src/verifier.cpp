// SPDX-License-Identifier: Apache-2.0
#include "ssv/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <json.hpp>
#include <numeric>
#include <mutex>
#include <thread>

#include "ssv/util.hpp"

namespace ssv {

const char* polarityName(Polarity p) { return p == Polarity::Positive ? "positive" : "negative"; }

const char* failReasonName(FailReason r) {
  switch (r) {
    case FailReason::PosUnsat: return "PosUnsat";
    case FailReason::NegSat: return "NegSat";
    case FailReason::IllFormedExample: return "IllFormedExample";
    case FailReason::Timeout: return "Timeout";
  }
  return "?";
}

const char* degeneracyName(Degeneracy d) {
  switch (d) {
    case Degeneracy::Tautology: return "Tautology";
    case Degeneracy::Contradiction: return "Contradiction";
    case Degeneracy::VacuousImplication: return "VacuousImplication";
    case Degeneracy::Undetermined: return "Undetermined";
  }
  return "?";
}

namespace {

bool isNoneCode(const std::string& code) {
  std::string c = trim(code);
  return c.empty() || c == "pass" || c == "NONE" || c == "None";
}

}  // namespace

Instantiation makeInstantiation(const SegmentedProgram& program, std::size_t constraintIndex,
                                Polarity polarity, std::optional<std::string> description,
                                const std::string& code) {
  Instantiation inst;
  inst.constraintIndex = constraintIndex;
  inst.polarity = polarity;
  inst.code = trim(code);
  if (description && (trim(*description) == "NONE" || trim(*description).empty())) description.reset();
  inst.description = std::move(description);
  if (!inst.description || isNoneCode(inst.code)) {
    inst.description.reset();
    return inst;
  }
  const Scope& scope = *program.scope;
  auto free = [&] {
    try {
      return freeSymbols(inst.code, scope);
    } catch (const DslError&) {
      return std::set<std::string>{};
    }
  }();
  if (!free.empty()) {
    inst.illFormed = true;
    std::string names;
    for (const auto& n : free) names += (names.empty() ? "" : ", ") + n;
    inst.error = "undeclared free variables: " + names;
    return inst;
  }
  try {
    Expr e = parseExpr(inst.code, scope);
    if (e->sort != kBool) {
      inst.illFormed = true;
      inst.error = "example is not a boolean expression";
      return inst;
    }
    inst.expr = e;
  } catch (const DslError& err) {
    inst.illFormed = true;
    inst.error = err.what();
  }
  return inst;
}

VerificationOutcome verifyInstantiations(SatChecker& checker, const SegmentedProgram& program,
                                         const std::vector<Instantiation>& insts, int budgetMs,
                                         unsigned workers) {
  for (const auto& i : insts)
    if (i.constraintIndex >= program.constraints.size())
      throw Error("instantiation refers to constraint " + std::to_string(i.constraintIndex) +
                  " but the program has " + std::to_string(program.constraints.size()));

  // deterministic order regardless of input order
  std::vector<std::size_t> order(insts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = insts[a];
    const auto& y = insts[b];
    if (x.constraintIndex != y.constraintIndex) return x.constraintIndex < y.constraintIndex;
    return x.polarity == Polarity::Positive && y.polarity == Polarity::Negative;
  });

  const Scope& scope = *program.scope;
  std::vector<InstantiationCheck> checks(order.size());
  auto run = [&](std::size_t k) {
    const Instantiation& inst = insts[order[k]];
    InstantiationCheck& c = checks[k];
    c.position = order[k];
    if (inst.illFormed) {
      c.failure = FailReason::IllFormedExample;
      return;
    }
    if (!inst.expr) {
      c.skipped = true;
      return;
    }
    std::vector<Expr> extra = program.constraints[inst.constraintIndex].exprs;
    extra.push_back(inst.expr);
    c.status = checkSat(checker, scope, program.init.preconditions, extra, budgetMs).status;
    if (c.status == SatStatus::Unknown)
      c.failure = FailReason::Timeout;
    else if (inst.polarity == Polarity::Positive && c.status == SatStatus::Unsat)
      c.failure = FailReason::PosUnsat;
    else if (inst.polarity == Polarity::Negative && c.status == SatStatus::Sat)
      c.failure = FailReason::NegSat;
  };

  const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(checks.size())));
  if (n <= 1) {
    for (std::size_t k = 0; k < checks.size(); ++k) run(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < checks.size();) {
          try {
            run(k);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  VerificationOutcome out;
  out.checks = std::move(checks);
  for (const auto& c : out.checks) {
    if (c.failure) {
      out.pass = false;
      out.failing = insts[c.position];
      out.reason = c.failure;
      break;
    }
  }
  return out;
}

namespace {

/// Every ForAll(vs, Implies(a, b)) with the binders of enclosing quantifiers.
void findImplications(const Expr& e, std::vector<Binder>& outer,
                      std::vector<std::pair<std::vector<Binder>, Expr>>& out) {
  if (e->op == Op::ForAll || e->op == Op::Exists) {
    if (e->op == Op::ForAll && e->args[0]->op == Op::Implies) {
      std::vector<Binder> bs = outer;
      bs.insert(bs.end(), e->binders.begin(), e->binders.end());
      out.emplace_back(std::move(bs), e->args[0]->args[0]);
    }
    const std::size_t mark = outer.size();
    outer.insert(outer.end(), e->binders.begin(), e->binders.end());
    findImplications(e->args[0], outer, out);
    outer.resize(mark);
    return;
  }
  for (const auto& a : e->args) findImplications(a, outer, out);
}

}  // namespace

std::vector<Degeneracy> degeneracyCheck(SatChecker& checker, const Scope& scope,
                                        const std::vector<Expr>& init,
                                        const ConstraintSegment& constraint, int budgetMs) {
  std::vector<Degeneracy> flags;
  bool undetermined = false;
  const Expr all = mkAnd(constraint.exprs);

  const SatStatus neg = checkSat(checker, scope, init, {mkNot(all)}, budgetMs).status;
  if (neg == SatStatus::Unsat) flags.push_back(Degeneracy::Tautology);
  undetermined |= neg == SatStatus::Unknown;

  const SatStatus pos = checkSat(checker, scope, init, constraint.exprs, budgetMs).status;
  if (pos == SatStatus::Unsat) flags.push_back(Degeneracy::Contradiction);
  undetermined |= pos == SatStatus::Unknown;

  std::vector<std::pair<std::vector<Binder>, Expr>> implications;
  for (const auto& e : constraint.exprs) {
    std::vector<Binder> outer;
    findImplications(expandComprehensions(e, scope), outer, implications);
  }
  for (const auto& [binders, antecedent] : implications) {
    auto ex = std::make_shared<ExprNode>();
    ex->op = Op::Exists;
    ex->sort = kBool;
    ex->binders = binders;
    for (auto& b : ex->binders) b.domain = Binder::Domain::Sort;
    ex->args = {antecedent};
    const SatStatus st = checkSat(checker, scope, init, {ex}, budgetMs).status;
    undetermined |= st == SatStatus::Unknown;
    if (st == SatStatus::Unsat) {
      flags.push_back(Degeneracy::VacuousImplication);
      break;
    }
  }
  if (undetermined) flags.push_back(Degeneracy::Undetermined);
  return flags;
}

WellFormedReport isWellFormed(SatChecker& checker, const SegmentedProgram& program,
                              const AnswerOutcome& outcome, int budgetMs,
                              const std::vector<OptionLabel>* taskLabels) {
  WellFormedReport r;
  r.structureOk = true;
  auto broken = [&](std::string why) {
    if (r.structureOk) r.structureError = std::move(why);
    r.structureOk = false;
  };
  if (program.constraints.empty()) broken("no constraint segments");
  if (program.options.empty()) broken("no option segments");
  for (std::size_t i = 0; i < program.constraints.size(); ++i)
    if (trim(program.constraints[i].nlText).empty())
      broken("constraint " + std::to_string(i) + " has no description");
  if (taskLabels) {
    for (const auto& o : program.options)
      if (std::find(taskLabels->begin(), taskLabels->end(), o.label) == taskLabels->end())
        broken("option " + o.label.str() + " is not an answer option of the task");
  }
  r.singleAnswerOk = outcome.passing.size() == 1;
  for (std::size_t i = 0; i < program.constraints.size(); ++i) {
    for (Degeneracy d : degeneracyCheck(checker, *program.scope, program.init.preconditions,
                                        program.constraints[i], budgetMs))
      r.degenerate.push_back({i, d});
  }
  return r;
}

std::vector<Instantiation> instantiationsFromJson(const SegmentedProgram& program, const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (!j.is_array()) throw FormatError("instantiations must be a JSON array");
  std::vector<Instantiation> out;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("constraint") || !e.contains("polarity") || !e.contains("code"))
      throw FormatError("instantiation needs constraint, polarity and code");
    if (!e["constraint"].is_number_unsigned() || !e["polarity"].is_string() || !e["code"].is_string())
      throw FormatError("instantiation fields have the wrong type");
    const auto idx = e["constraint"].get<std::size_t>();
    if (idx >= program.constraints.size())
      throw FormatError("constraint index " + std::to_string(idx) + " is out of range");
    const auto pol = e["polarity"].get<std::string>();
    if (pol != "positive" && pol != "negative") throw FormatError("polarity must be positive or negative");
    std::optional<std::string> desc;
    if (auto it = e.find("description"); it != e.end() && it->is_string()) desc = it->get<std::string>();
    out.push_back(makeInstantiation(program, idx, pol == "positive" ? Polarity::Positive : Polarity::Negative,
                                    desc, e["code"].get<std::string>()));
  }
  return out;
}

}  // namespace ssv
