// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "ssv/dsl.hpp"

namespace ssv {

enum class SatStatus { Sat, Unsat, Unknown };
const char* statusName(SatStatus s);

struct CheckResult {
  SatStatus status = SatStatus::Unknown;
  double elapsedMs = 0;
  bool fromCache = false;
};

/// A satisfiability question: are all assertions jointly satisfiable in scope?
struct Query {
  const Scope* scope = nullptr;
  std::vector<Expr> assertions;
};

/// Anything that can decide a Query. Implementations must be thread-safe.
class SatChecker {
 public:
  virtual ~SatChecker() = default;
  virtual CheckResult check(const Query& q, int budgetMs) = 0;
};

}  // namespace ssv
