// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>

#include "ssv/dsl.hpp"

namespace ssv {

const char* opName(Op op) {
  switch (op) {
    case Op::BoolLit: return "BoolLit";
    case Op::IntLit: return "IntLit";
    case Op::Member: return "Member";
    case Op::Const: return "Const";
    case Op::Var: return "Var";
    case Op::Apply: return "Apply";
    case Op::Eq: return "Eq";
    case Op::Neq: return "Neq";
    case Op::Lt: return "Lt";
    case Op::Le: return "Le";
    case Op::Gt: return "Gt";
    case Op::Ge: return "Ge";
    case Op::Add: return "Add";
    case Op::Sub: return "Sub";
    case Op::Mul: return "Mul";
    case Op::Neg: return "Neg";
    case Op::And: return "And";
    case Op::Or: return "Or";
    case Op::Not: return "Not";
    case Op::Implies: return "Implies";
    case Op::Xor: return "Xor";
    case Op::Ite: return "Ite";
    case Op::Distinct: return "Distinct";
    case Op::Sum: return "Sum";
    case Op::ForAll: return "ForAll";
    case Op::Exists: return "Exists";
    case Op::Comprehension: return "Comprehension";
    case Op::Name: return "Name";
    case Op::Call: return "Call";
  }
  return "?";
}

const char* DslError::kindName(Kind kind) {
  switch (kind) {
    case Kind::Syntax: return "SyntaxError";
    case Kind::UnknownSymbol: return "UnknownSymbol";
    case Kind::SortMismatch: return "SortMismatch";
    case Kind::ArityMismatch: return "ArityMismatch";
    case Kind::MissingSegment: return "MissingSegment";
    case Kind::DuplicateOptionLabel: return "DuplicateOptionLabel";
    case Kind::DuplicateName: return "DuplicateName";
    case Kind::UnboundedComprehension: return "UnboundedComprehension";
  }
  return "DslError";
}

std::string DslError::format(Kind kind, const std::string& what, SourcePos pos) {
  std::string s = kindName(kind);
  if (pos.line > 0) s += " at " + std::to_string(pos.line) + ":" + std::to_string(pos.col);
  return s + ": " + what;
}

Expr mk(Op op, SortId sort, std::vector<Expr> args) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->sort = sort;
  n->args = std::move(args);
  return n;
}

Expr mkBool(bool v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::BoolLit;
  n->sort = kBool;
  n->value = v ? 1 : 0;
  return n;
}

Expr mkInt(std::int64_t v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::IntLit;
  n->sort = kInt;
  n->value = v;
  return n;
}

Expr mkNot(Expr e) { return mk(Op::Not, kBool, {std::move(e)}); }

Expr mkAnd(std::vector<Expr> es) {
  if (es.size() == 1) return es.front();
  return mk(Op::And, kBool, std::move(es));
}

bool Binder::sameShape(const Binder& o) const {
  if (name != o.name || sort != o.sort || domain != o.domain) return false;
  if (domain == Domain::Collection) return collection == o.collection;
  if (domain == Domain::Range) return lo == o.lo && hi == o.hi;
  return true;
}

bool equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->sort != b->sort || a->name != b->name || a->value != b->value)
    return false;
  if (a->binders.size() != b->binders.size()) return false;
  for (std::size_t i = 0; i < a->binders.size(); ++i)
    if (!a->binders[i].sameShape(b->binders[i])) return false;
  return equal(a->args, b->args);
}

bool equal(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal(a[i], b[i])) return false;
  return true;
}

bool Decl::sameShape(const Decl& o) const {
  return kind == o.kind && name == o.name && argSorts == o.argSorts && result == o.result &&
         isRange == o.isRange && lo == o.lo && hi == o.hi && equal(elements, o.elements);
}

// ---- Scope ----------------------------------------------------------------

Scope::Scope() {
  addSort({"Bool", SortDecl::Kind::Bool, {}});
  addSort({"Int", SortDecl::Kind::Int, {}});
}

SortId Scope::canonical(SortId id) const {
  if (id < 0) return id;
  return sort(id).kind == SortDecl::Kind::IntAlias ? kInt : id;
}

bool Scope::isEnum(SortId id) const { return id >= 0 && sort(id).kind == SortDecl::Kind::Enum; }

bool Scope::isFinite(SortId id) const { return id == kBool || isEnum(id); }

std::size_t Scope::domainSize(SortId id) const {
  if (id == kBool) return 2;
  return sort(id).members.size();
}

const Symbol* Scope::lookup(std::string_view name) const {
  auto it = names_.find(std::string(name));
  return it == names_.end() ? nullptr : &it->second;
}

namespace {

bool reserved(const std::string& n) {
  static const char* words[] = {"enum", "int", "sort", "const", "fn", "list", "assert", "check",
                                "for", "in", "range", "True", "False", "And", "Or", "Not",
                                "Implies", "Xor", "If", "Distinct", "Sum", "AtMost", "AtLeast",
                                "Abs", "ForAll", "Exists"};
  return std::find(std::begin(words), std::end(words), n) != std::end(words);
}

}  // namespace

void Scope::claim(const std::string& name, Symbol sym, Span span) {
  if (reserved(name))
    throw DslError(DslError::Kind::DuplicateName, "'" + name + "' is a reserved word",
                   {span.line, span.col});
  if (!names_.emplace(name, sym).second)
    throw DslError(DslError::Kind::DuplicateName, "'" + name + "' is already declared",
                   {span.line, span.col});
}

SortId Scope::addSort(SortDecl s, Span span) {
  const SortId id = static_cast<SortId>(sorts_.size());
  if (s.kind == SortDecl::Kind::Enum && s.members.empty())
    throw DslError(DslError::Kind::Syntax, "enum '" + s.name + "' has no members",
                   {span.line, span.col});
  if (id >= 2) claim(s.name, {Symbol::Kind::Sort, id}, span);
  else names_.emplace(s.name, Symbol{Symbol::Kind::Sort, id});
  for (std::size_t m = 0; m < s.members.size(); ++m)
    claim(s.members[m], {Symbol::Kind::Member, id, static_cast<int>(m)}, span);
  sorts_.push_back(std::move(s));
  return id;
}

int Scope::addDecl(Decl d, Span span) {
  const int id = static_cast<int>(decls_.size());
  claim(d.name, {Symbol::Kind::Decl, id}, span);
  decls_.push_back(std::move(d));
  return id;
}

const char* checkTypeName(CheckType t) {
  switch (t) {
    case CheckType::Sat: return "sat";
    case CheckType::Unsat: return "unsat";
    case CheckType::Valid: return "valid";
  }
  return "sat";
}

std::optional<CheckType> checkTypeFromString(std::string_view s) {
  std::string l;
  for (char c : s) l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (l == "sat" || l == "is_sat") return CheckType::Sat;
  if (l == "unsat" || l == "is_unsat") return CheckType::Unsat;
  if (l == "valid" || l == "is_valid") return CheckType::Valid;
  return std::nullopt;
}

std::vector<Expr> SegmentedProgram::allConstraintExprs() const {
  std::vector<Expr> out;
  for (const auto& c : constraints) out.insert(out.end(), c.exprs.begin(), c.exprs.end());
  return out;
}

std::vector<Expr> SegmentedProgram::fullPreconditions() const {
  std::vector<Expr> out = init.preconditions;
  for (const auto& c : constraints) out.insert(out.end(), c.exprs.begin(), c.exprs.end());
  return out;
}

namespace {

bool sameDecls(const Scope& sa, const std::vector<int>& a, const Scope& sb,
               const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!sa.decl(a[i]).sameShape(sb.decl(b[i]))) return false;
  return true;
}

bool sameSorts(const Scope& sa, const std::vector<int>& a, const Scope& sb,
               const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(sa.sort(a[i]) == sb.sort(b[i]))) return false;
  return true;
}

}  // namespace

bool equal(const SegmentedProgram& a, const SegmentedProgram& b) {
  const Scope& sa = *a.scope;
  const Scope& sb = *b.scope;
  if (a.init.nlContext != b.init.nlContext) return false;
  if (!sameSorts(sa, a.init.sortIds, sb, b.init.sortIds)) return false;
  if (!sameDecls(sa, a.init.declIds, sb, b.init.declIds)) return false;
  if (!equal(a.init.preconditions, b.init.preconditions)) return false;
  if (a.constraints.size() != b.constraints.size() || a.options.size() != b.options.size())
    return false;
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    const auto& x = a.constraints[i];
    const auto& y = b.constraints[i];
    if (x.nlText != y.nlText || !equal(x.exprs, y.exprs) ||
        !sameSorts(sa, x.sortIds, sb, y.sortIds) || !sameDecls(sa, x.declIds, sb, y.declIds))
      return false;
  }
  for (std::size_t i = 0; i < a.options.size(); ++i) {
    const auto& x = a.options[i];
    const auto& y = b.options[i];
    if (x.label != y.label || x.nlCheck != y.nlCheck || x.checkType != y.checkType ||
        !equal(x.checkExpr, y.checkExpr))
      return false;
  }
  return true;
}

// ---- substitution, expansion, free symbols --------------------------------

Expr substitute(const Expr& e, const std::string& name, const Expr& value) {
  if (e->op == Op::Var || e->op == Op::Name) return e->name == name ? value : e;
  if (e->args.empty()) return e;
  // Quantifier/comprehension binders shadow the name inside the body.
  const bool shadows = std::any_of(e->binders.begin(), e->binders.end(),
                                   [&](const Binder& b) { return b.name == name; });
  if (shadows) return e;
  std::vector<Expr> args;
  args.reserve(e->args.size());
  bool changed = false;
  for (const auto& a : e->args) {
    args.push_back(substitute(a, name, value));
    changed = changed || args.back() != a;
  }
  if (!changed) return e;
  auto n = std::make_shared<ExprNode>(*e);
  n->args = std::move(args);
  return n;
}

namespace {

std::vector<Expr> binderElements(const Binder& b, const Scope& scope) {
  std::vector<Expr> out;
  switch (b.domain) {
    case Binder::Domain::Range:
      for (std::int64_t i = b.lo; i < b.hi; ++i) out.push_back(mkInt(i));
      break;
    case Binder::Domain::Collection: {
      const Symbol* s = scope.lookup(b.collection);
      if (!s || s->kind != Symbol::Kind::Decl ||
          scope.decl(s->index).kind != Decl::Kind::Collection)
        throw DslError(DslError::Kind::UnboundedComprehension,
                       "'" + b.collection + "' is not a finite collection");
      const Decl& d = scope.decl(s->index);
      if (d.isRange) {
        for (std::int64_t i = d.lo; i < d.hi; ++i) out.push_back(mkInt(i));
      } else {
        out = d.elements;
      }
      break;
    }
    case Binder::Domain::Sort: {
      if (b.sort == kBool) {
        out = {mkBool(false), mkBool(true)};
        break;
      }
      if (!scope.isEnum(b.sort))
        throw DslError(DslError::Kind::UnboundedComprehension,
                       "binder '" + b.name + "' ranges over a non-finite sort");
      const auto& members = scope.sort(b.sort).members;
      for (std::size_t m = 0; m < members.size(); ++m) {
        auto n = std::make_shared<ExprNode>();
        n->op = Op::Member;
        n->sort = b.sort;
        n->name = members[m];
        n->value = static_cast<std::int64_t>(m);
        out.push_back(n);
      }
      break;
    }
  }
  return out;
}

void expandItems(const Expr& comp, std::size_t binder, const Expr& tmpl, const Scope& scope,
                 std::vector<Expr>& out) {
  if (binder == comp->binders.size()) {
    out.push_back(tmpl);
    return;
  }
  const Binder& b = comp->binders[binder];
  for (const auto& v : binderElements(b, scope))
    expandItems(comp, binder + 1, substitute(tmpl, b.name, v), scope, out);
}

}  // namespace

Expr expandComprehensions(const Expr& e, const Scope& scope) {
  if (e->op == Op::Comprehension)
    throw DslError(DslError::Kind::Syntax, "comprehension outside a variadic position");
  if (e->args.empty()) return e;
  std::vector<Expr> args;
  bool changed = false;
  for (const auto& a : e->args) {
    if (a->op == Op::Comprehension) {
      std::vector<Expr> items;
      expandItems(a, 0, a->args.at(0), scope, items);
      for (auto& it : items) args.push_back(expandComprehensions(it, scope));
      changed = true;
    } else {
      args.push_back(expandComprehensions(a, scope));
      changed = changed || args.back() != a;
    }
  }
  if (!changed) return e;
  auto n = std::make_shared<ExprNode>(*e);
  n->args = std::move(args);
  return n;
}

namespace {

void collectFree(const Expr& e, const Scope& scope, std::vector<std::string>& bound,
                 std::set<std::string>& out) {
  auto isBound = [&](const std::string& n) {
    return std::find(bound.begin(), bound.end(), n) != bound.end();
  };
  switch (e->op) {
    case Op::Name:
    case Op::Const:
    case Op::Member:
    case Op::Var:
      if (!isBound(e->name) && !scope.lookup(e->name)) out.insert(e->name);
      return;
    case Op::Apply:
    case Op::Call:
      if (!e->name.empty() && !reserved(e->name) && !isBound(e->name) && !scope.lookup(e->name))
        out.insert(e->name);
      break;
    default:
      break;
  }
  const std::size_t mark = bound.size();
  for (const auto& b : e->binders) {
    if (b.domain == Binder::Domain::Collection && !isBound(b.collection) &&
        !scope.lookup(b.collection))
      out.insert(b.collection);
    if (b.domain == Binder::Domain::Sort && !b.sortName.empty() && !scope.lookup(b.sortName))
      out.insert(b.sortName);
    bound.push_back(b.name);
  }
  for (const auto& a : e->args) collectFree(a, scope, bound, out);
  bound.resize(mark);
}

}  // namespace

std::set<std::string> freeSymbols(const Expr& expr, const Scope& scope) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  collectFree(expr, scope, bound, out);
  return out;
}

std::set<std::string> freeSymbols(std::string_view source, const Scope& scope) {
  return freeSymbols(parseExprSyntax(source), scope);
}

}  // namespace ssv
