// SPDX-License-Identifier: Apache-2.0
//
// Checking a program against concrete instantiations, and well-formedness.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssv/smt.hpp"

namespace ssv {

enum class Polarity { Positive, Negative };
const char* polarityName(Polarity p);

/// One concrete example for one constraint.
struct Instantiation {
  std::size_t constraintIndex = 0;
  Polarity polarity = Polarity::Positive;
  std::optional<std::string> description;  // nullopt means NONE
  std::string code;                        // source as given
  Expr expr;                               // null for NONE or ill-formed examples
  bool illFormed = false;
  std::string error;  // parse or scope diagnostic when illFormed

  bool isNone() const { return !illFormed && !expr; }
};

/// Parse `code` in the program scope. "NONE"/"pass"/empty code gives a NONE instantiation;
/// anything that fails to parse or has free symbols gives an ill-formed one.
Instantiation makeInstantiation(const SegmentedProgram& program, std::size_t constraintIndex,
                                Polarity polarity, std::optional<std::string> description,
                                const std::string& code);

/// JSON array of {"constraint": i, "polarity": "positive" | "negative", "description": text | null,
/// "code": text}. Constraint indices are 0-based. Throws FormatError.
std::vector<Instantiation> instantiationsFromJson(const SegmentedProgram& program, const std::string& text);

enum class FailReason { PosUnsat, NegSat, IllFormedExample, Timeout };
const char* failReasonName(FailReason r);

struct InstantiationCheck {
  std::size_t position = 0;  // index into the input list
  SatStatus status = SatStatus::Unknown;
  bool skipped = false;  // NONE
  std::optional<FailReason> failure;
};

struct VerificationOutcome {
  bool pass = true;
  std::optional<Instantiation> failing;
  std::optional<FailReason> reason;
  std::vector<InstantiationCheck> checks;  // in (constraintIndex, polarity) order
};

/// Positive examples must be SAT and negative ones UNSAT together with init and their own
/// constraint. The reported failure is the first in (constraintIndex, Positive < Negative) order.
VerificationOutcome verifyInstantiations(SatChecker& checker, const SegmentedProgram& program,
                                         const std::vector<Instantiation>& insts,
                                         int budgetMs = kDefaultBudgetMs, unsigned workers = 1);

enum class Degeneracy { Tautology, Contradiction, VacuousImplication, Undetermined };
const char* degeneracyName(Degeneracy d);

struct DegenerateConstraint {
  std::size_t index = 0;
  Degeneracy flag = Degeneracy::Tautology;
};

struct WellFormedReport {
  bool structureOk = false;
  bool singleAnswerOk = false;
  std::vector<DegenerateConstraint> degenerate;
  std::string structureError;

  bool ok() const { return structureOk && singleAnswerOk && degenerate.empty(); }
};

/// Flags for one constraint relative to `initPreconditions`. UNKNOWN raises Undetermined.
std::vector<Degeneracy> degeneracyCheck(SatChecker& checker, const Scope& scope,
                                        const std::vector<Expr>& initPreconditions,
                                        const ConstraintSegment& constraint,
                                        int budgetMs = kDefaultBudgetMs);

/// `taskLabels`, when given, must contain every option label.
WellFormedReport isWellFormed(SatChecker& checker, const SegmentedProgram& program,
                              const AnswerOutcome& outcome, int budgetMs = kDefaultBudgetMs,
                              const std::vector<OptionLabel>* taskLabels = nullptr);

}  // namespace ssv
