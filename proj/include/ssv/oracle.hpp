// SPDX-License-Identifier: Apache-2.0
//
// Brute-force model enumeration over finite (enum and Bool) programs.
#pragma once

#include <cstdint>
#include <vector>

#include "ssv/check.hpp"

namespace ssv {

struct OracleOptions {
  std::uint64_t cap = std::uint64_t{1} << 24;
  unsigned workers = 1;
};

/// Total assignment of every constant and function table in a scope.
/// Values are member indices (enum), 0/1 (Bool).
struct Assignment {
  std::vector<std::vector<std::int64_t>> tables;  // per decl; empty for collections
};

/// Evaluate a closed expression; Bool results are 0/1. Throws OracleError(Unsupported)
/// for quantifiers over non-finite sorts.
std::int64_t evaluate(const Expr& e, const Scope& scope, const Assignment& a);

/// Number of states, or 0 when unsupported.
std::uint64_t stateSpace(const Scope& scope, const std::vector<Expr>& exprs,
                         const OracleOptions& opts = {});
bool supportsProgram(const Scope& scope, const std::vector<Expr>& exprs,
                     const OracleOptions& opts = {});

/// Sat iff some total assignment satisfies every expression. Throws OracleError.
SatStatus oracleCheck(const Scope& scope, const std::vector<Expr>& exprs,
                      const OracleOptions& opts = {});
std::uint64_t countModels(const Scope& scope, const std::vector<Expr>& exprs,
                          const OracleOptions& opts = {});
/// First satisfying assignment in enumeration order, if any.
bool findModel(const Scope& scope, const std::vector<Expr>& exprs, Assignment& out,
               const OracleOptions& opts = {});

/// SatChecker backed by the oracle; ignores budgets.
class OracleChecker : public SatChecker {
 public:
  explicit OracleChecker(OracleOptions opts = {}) : opts_(opts) {}
  CheckResult check(const Query& q, int budgetMs) override;

 private:
  OracleOptions opts_;
};

}  // namespace ssv
