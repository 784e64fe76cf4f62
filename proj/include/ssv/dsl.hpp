// SPDX-License-Identifier: Apache-2.0
//
// The program language: sorts, declarations, expressions and segmented programs.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ssv/error.hpp"
#include "ssv/task.hpp"

namespace ssv {

using SortId = int;
inline constexpr SortId kBool = 0;
inline constexpr SortId kInt = 1;
inline constexpr SortId kNoSort = -1;

struct SortDecl {
  enum class Kind { Bool, Int, Enum, IntAlias, Uninterpreted };
  std::string name;
  Kind kind = Kind::Enum;
  std::vector<std::string> members;

  bool operator==(const SortDecl&) const = default;
};

enum class Op : std::uint8_t {
  BoolLit, IntLit, Member, Const, Var, Apply,
  Eq, Neq, Lt, Le, Gt, Ge,
  Add, Sub, Mul, Neg,
  And, Or, Not, Implies, Xor, Ite, Distinct, Sum,
  ForAll, Exists, Comprehension,
  // surface forms, present only before elaboration
  Name, Call,
};

const char* opName(Op op);

struct Span {
  int line = 0;
  int col = 0;
};

/// A quantifier or comprehension binder.
struct Binder {
  enum class Domain { Sort, Collection, Range };
  std::string name;
  SortId sort = kNoSort;
  std::string sortName;  // as written; empty when inferred
  Domain domain = Domain::Sort;
  std::string collection;  // Domain::Collection
  std::int64_t lo = 0, hi = 0;  // Domain::Range, half-open

  bool sameShape(const Binder& o) const;
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  Op op = Op::BoolLit;
  SortId sort = kNoSort;
  std::string name;         // Const/Var/Member/Apply/Name/Call
  std::int64_t value = 0;   // BoolLit/IntLit, member index for Member, depth for Var
  std::vector<Expr> args;
  std::vector<Binder> binders;  // ForAll/Exists/Comprehension
  Span span;
};

Expr mk(Op op, SortId sort, std::vector<Expr> args = {});
Expr mkBool(bool v);
Expr mkInt(std::int64_t v);
Expr mkNot(Expr e);
Expr mkAnd(std::vector<Expr> es);

/// Structural equality; spans are ignored.
bool equal(const Expr& a, const Expr& b);
bool equal(const std::vector<Expr>& a, const std::vector<Expr>& b);

struct Decl {
  enum class Kind { Constant, Function, Collection };
  Kind kind = Kind::Constant;
  std::string name;
  std::vector<SortId> argSorts;
  std::vector<std::string> argSortNames;
  SortId result = kNoSort;  // element sort for collections
  std::string resultSortName;
  bool isRange = false;
  std::int64_t lo = 0, hi = 0;
  std::vector<Expr> elements;

  bool sameShape(const Decl& o) const;
};

/// Everything a name can resolve to.
struct Symbol {
  enum class Kind { Sort, Member, Decl };
  Kind kind;
  int index;       // sort id or decl index
  int member = 0;  // member index for Kind::Member
};

/// Sorts and declarations visible to expressions. Sort 0 is Bool, sort 1 is Int.
class Scope {
 public:
  Scope();

  const std::vector<SortDecl>& sorts() const { return sorts_; }
  const std::vector<Decl>& decls() const { return decls_; }
  const SortDecl& sort(SortId id) const { return sorts_.at(static_cast<std::size_t>(id)); }
  const Decl& decl(int i) const { return decls_.at(static_cast<std::size_t>(i)); }

  /// Canonical sort for a declared sort: integer aliases collapse to kInt.
  SortId canonical(SortId id) const;
  const std::string& sortName(SortId id) const { return sort(id).name; }
  bool isEnum(SortId id) const;
  bool isFinite(SortId id) const;  // Bool or Enum
  std::size_t domainSize(SortId id) const;  // for finite sorts

  const Symbol* lookup(std::string_view name) const;
  SortId addSort(SortDecl s, Span span = {});
  int addDecl(Decl d, Span span = {});

 private:
  void claim(const std::string& name, Symbol sym, Span span);

  std::vector<SortDecl> sorts_;
  std::vector<Decl> decls_;
  std::unordered_map<std::string, Symbol> names_;
};

enum class CheckType { Sat, Unsat, Valid };
const char* checkTypeName(CheckType t);
std::optional<CheckType> checkTypeFromString(std::string_view s);

struct InitSegment {
  std::string nlContext;
  bool hasMarker = false;
  std::vector<int> sortIds;  // user sorts declared here
  std::vector<int> declIds;
  std::vector<Expr> preconditions;
};

struct ConstraintSegment {
  std::string nlText;
  std::vector<int> sortIds;
  std::vector<int> declIds;
  std::vector<Expr> exprs;
};

struct OptionSegment {
  OptionLabel label;
  std::string nlCheck;
  CheckType checkType = CheckType::Sat;
  bool explicitCheckType = false;
  Expr checkExpr;
};

struct SegmentedProgram {
  std::shared_ptr<const Scope> scope;
  InitSegment init;
  std::vector<ConstraintSegment> constraints;
  std::vector<OptionSegment> options;
  std::optional<CheckType> defaultCheckType;  // from a CHECK TYPE annotation

  /// All constraint expressions in order, flattened.
  std::vector<Expr> allConstraintExprs() const;
  /// init preconditions followed by every constraint expression.
  std::vector<Expr> fullPreconditions() const;
};

/// Structural equality of programs (NL text, declarations, expressions).
bool equal(const SegmentedProgram& a, const SegmentedProgram& b);

// ---- parsing --------------------------------------------------------------

SegmentedProgram parseProgram(std::string_view source);

/// Untyped parse; names are left unresolved.
Expr parseExprSyntax(std::string_view source);
/// Resolve names and sorts against `scope`.
Expr elaborate(const Expr& syntax, const Scope& scope);
Expr parseExpr(std::string_view source, const Scope& scope);

/// Identifiers used but neither declared in scope nor bound by a quantifier or comprehension.
std::set<std::string> freeSymbols(const Expr& expr, const Scope& scope);
std::set<std::string> freeSymbols(std::string_view source, const Scope& scope);

/// Replace every comprehension by its elements. Throws DslError(UnboundedComprehension).
Expr expandComprehensions(const Expr& expr, const Scope& scope);

/// Substitute bound variable `name` by `value`, respecting shadowing.
Expr substitute(const Expr& e, const std::string& name, const Expr& value);

// ---- printing -------------------------------------------------------------

std::string printExpr(const Expr& e, const Scope& scope);
std::string printProgram(const SegmentedProgram& p);
/// One constraint segment, marker line included.
std::string printConstraint(const SegmentedProgram& p, std::size_t index);
/// The init segment, marker line included.
std::string printInit(const SegmentedProgram& p);
/// The CHECK TYPE annotation and every option segment.
std::string printOptions(const SegmentedProgram& p);
/// Segment code without the marker line.
std::string printInitCode(const SegmentedProgram& p);
std::string printConstraintCode(const SegmentedProgram& p, std::size_t index);

}  // namespace ssv
