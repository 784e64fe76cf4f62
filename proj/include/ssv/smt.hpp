// SPDX-License-Identifier: Apache-2.0
//
// SMT-LIB 2 compilation, the external solver client and the check predicates.
#pragma once

#include <atomic>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssv/check.hpp"

namespace ssv {

inline constexpr int kDefaultBudgetMs = 10000;
inline constexpr std::uint64_t kDefaultGroundingBound = 4096;

/// Replace ForAll/Exists over Bool or enum sorts by an explicit And/Or of instances
/// when |domain|^|binders| <= bound. Comprehensions must already be expanded.
Expr groundQuantifiers(const Expr& e, const Scope& scope, std::uint64_t bound);

/// The full script for a query. Bound variables are renamed by depth, so
/// alpha-equivalent queries compile to identical text.
std::string compileScript(const Query& q, std::uint64_t groundingBound = kDefaultGroundingBound);

/// Hex SHA-256 of the compiled script.
std::string canonicalKey(const Query& q, std::uint64_t groundingBound = kDefaultGroundingBound);

struct SmtOptions {
  std::string solverCmd = "z3 -in";
  std::uint64_t groundingBound = kDefaultGroundingBound;
};

/// Runs one fresh solver process per uncached query. Thread-safe.
class SmtBackend : public SatChecker {
 public:
  explicit SmtBackend(SmtOptions opts = {});

  CheckResult check(const Query& q, int budgetMs) override;

  /// Merge a persisted cache (JSON object: key hex -> "sat" | "unsat"). Missing file is fine.
  void loadCache(const std::string& path);
  void saveCache(const std::string& path) const;
  void clearCache();

  std::size_t cacheSize() const;
  std::uint64_t solverRuns() const { return runs_.load(); }
  std::uint64_t cacheHits() const { return hits_.load(); }
  const SmtOptions& options() const { return opts_; }

 private:
  SatStatus runSolver(const std::string& script, int budgetMs) const;

  SmtOptions opts_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::shared_future<SatStatus>> cache_;
  mutable std::atomic<std::uint64_t> runs_{0};
  std::atomic<std::uint64_t> hits_{0};
};

// ---- predicates -------------------------------------------------------------

/// Status of preconditions together with extra assertions.
CheckResult checkSat(SatChecker& checker, const Scope& scope, const std::vector<Expr>& preconditions,
                     const std::vector<Expr>& extra, int budgetMs = kDefaultBudgetMs);

// UNKNOWN anywhere makes each predicate false.
bool isSat(SatChecker& checker, const Scope& scope, const std::vector<Expr>& preconditions,
           const Expr& prop, int budgetMs = kDefaultBudgetMs);
bool isUnsat(SatChecker& checker, const Scope& scope, const std::vector<Expr>& preconditions,
             const Expr& prop, int budgetMs = kDefaultBudgetMs);
/// Preconditions satisfiable and their conjunction with Not(prop) unsatisfiable.
bool isValid(SatChecker& checker, const Scope& scope, const std::vector<Expr>& preconditions,
             const Expr& prop, int budgetMs = kDefaultBudgetMs);

struct OptionOutcome {
  CheckType checkType = CheckType::Sat;
  /// Sat/Unsat: status of pre + check. Valid: status of pre + Not(check).
  SatStatus status = SatStatus::Unknown;
  /// Valid only: status of pre alone.
  std::optional<SatStatus> baseStatus;
  bool passed = false;
};

struct AnswerOutcome {
  std::set<OptionLabel> passing;
  std::optional<OptionLabel> answer;  // present iff exactly one option passes
  std::map<OptionLabel, OptionOutcome> perOption;

  bool anyUnknown() const;
};

/// Evaluate every option against init plus all constraints.
AnswerOutcome executeProgram(SatChecker& checker, const SegmentedProgram& program,
                             int budgetMs = kDefaultBudgetMs);

}  // namespace ssv
