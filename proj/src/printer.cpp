// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include "ssv/dsl.hpp"

namespace ssv {
namespace {

int precedence(Op op) {
  switch (op) {
    case Op::Eq:
    case Op::Neq:
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: return 1;
    case Op::Add:
    case Op::Sub: return 2;
    case Op::Mul: return 3;
    case Op::Neg: return 4;
    default: return 5;
  }
}

const char* infix(Op op) {
  switch (op) {
    case Op::Eq: return " == ";
    case Op::Neq: return " != ";
    case Op::Lt: return " < ";
    case Op::Le: return " <= ";
    case Op::Gt: return " > ";
    case Op::Ge: return " >= ";
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return " * ";
    default: return nullptr;
  }
}

class Printer {
 public:
  explicit Printer(const Scope& s) : s_(s) {}

  std::string expr(const Expr& e, int minPrec = 0) {
    const int p = precedence(e->op);
    std::string out = render(e);
    if (p < minPrec) return "(" + out + ")";
    return out;
  }

 private:
  std::string list(const std::vector<Expr>& args) {
    std::string out;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ", ";
      out += expr(args[i]);
    }
    return out;
  }

  std::string call(const char* fn, const std::vector<Expr>& args) {
    return std::string(fn) + "(" + list(args) + ")";
  }

  std::string binder(const Binder& b) {
    switch (b.domain) {
      case Binder::Domain::Range:
        return "for " + b.name + " in range(" + std::to_string(b.lo) + ", " + std::to_string(b.hi) + ")";
      case Binder::Domain::Collection:
        return "for " + b.name + " in " + b.collection;
      case Binder::Domain::Sort:
        return "for " + b.name + " in " + (b.sortName.empty() ? s_.sortName(b.sort) : b.sortName);
    }
    return {};
  }

  std::string render(const Expr& e) {
    switch (e->op) {
      case Op::BoolLit: return e->value ? "True" : "False";
      case Op::IntLit: return std::to_string(e->value);
      case Op::Member:
      case Op::Const:
      case Op::Var:
      case Op::Name: return e->name;
      case Op::Apply:
      case Op::Call: return e->name + "(" + list(e->args) + ")";
      case Op::Eq:
      case Op::Neq:
      case Op::Lt:
      case Op::Le:
      case Op::Gt:
      case Op::Ge: return expr(e->args[0], 2) + infix(e->op) + expr(e->args[1], 2);
      case Op::Add:
      case Op::Sub: return expr(e->args[0], 2) + infix(e->op) + expr(e->args[1], 3);
      case Op::Mul: return expr(e->args[0], 3) + infix(e->op) + expr(e->args[1], 4);
      case Op::Neg: return "-" + expr(e->args[0], 4);
      case Op::And: return call("And", e->args);
      case Op::Or: return call("Or", e->args);
      case Op::Not: return call("Not", e->args);
      case Op::Implies: return call("Implies", e->args);
      case Op::Xor: return call("Xor", e->args);
      case Op::Ite: return call("If", e->args);
      case Op::Distinct: return call("Distinct", e->args);
      case Op::Sum: return call("Sum", e->args);
      case Op::ForAll:
      case Op::Exists: {
        std::string out = e->op == Op::ForAll ? "ForAll([" : "Exists([";
        for (std::size_t i = 0; i < e->binders.size(); ++i) {
          const Binder& b = e->binders[i];
          if (i) out += ", ";
          out += b.name + ": " + (b.sortName.empty() ? s_.sortName(b.sort) : b.sortName);
        }
        return out + "], " + expr(e->args[0]) + ")";
      }
      case Op::Comprehension: {
        std::string out = "[" + expr(e->args[0]);
        for (const auto& b : e->binders) out += " " + binder(b);
        return out + "]";
      }
    }
    return "?";
  }

  const Scope& s_;
};

void printDecls(std::ostringstream& out, const Scope& s, const std::vector<int>& sortIds,
                const std::vector<int>& declIds) {
  for (int id : sortIds) {
    const SortDecl& d = s.sort(id);
    switch (d.kind) {
      case SortDecl::Kind::Enum: {
        out << "enum " << d.name << " { ";
        for (std::size_t i = 0; i < d.members.size(); ++i) out << (i ? ", " : "") << d.members[i];
        out << " }\n";
        break;
      }
      case SortDecl::Kind::IntAlias: out << "int " << d.name << "\n"; break;
      case SortDecl::Kind::Uninterpreted: out << "sort " << d.name << "\n"; break;
      default: break;
    }
  }
  Printer pr(s);
  for (int id : declIds) {
    const Decl& d = s.decl(id);
    switch (d.kind) {
      case Decl::Kind::Constant: out << "const " << d.name << ": " << d.resultSortName << "\n"; break;
      case Decl::Kind::Function: {
        out << "fn " << d.name << "(";
        for (std::size_t i = 0; i < d.argSortNames.size(); ++i)
          out << (i ? ", " : "") << d.argSortNames[i];
        out << ") -> " << d.resultSortName << "\n";
        break;
      }
      case Decl::Kind::Collection: {
        if (d.isRange) {
          out << "list " << d.name << " = range(" << d.lo << ", " << d.hi << ")\n";
        } else if (d.elements.empty()) {
          out << "list " << d.name << ": " << d.resultSortName << " = []\n";
        } else {
          out << "list " << d.name << " = [";
          for (std::size_t i = 0; i < d.elements.size(); ++i)
            out << (i ? ", " : "") << pr.expr(d.elements[i]);
          out << "]\n";
        }
        break;
      }
    }
  }
}

void printInitTo(std::ostringstream& out, const SegmentedProgram& p) {
  const Scope& s = *p.scope;
  out << "#INIT";
  if (!p.init.nlContext.empty()) out << ": " << p.init.nlContext;
  out << "\n";
  printDecls(out, s, p.init.sortIds, p.init.declIds);
  Printer pr(s);
  for (const auto& e : p.init.preconditions) out << "assert " << pr.expr(e) << "\n";
}

void printConstraintTo(std::ostringstream& out, const SegmentedProgram& p, std::size_t i) {
  const Scope& s = *p.scope;
  const auto& c = p.constraints.at(i);
  out << "#CONSTRAINT: " << c.nlText << "\n";
  printDecls(out, s, c.sortIds, c.declIds);
  Printer pr(s);
  for (const auto& e : c.exprs) out << "assert " << pr.expr(e) << "\n";
}

}  // namespace

std::string printExpr(const Expr& e, const Scope& scope) { return Printer(scope).expr(e); }

std::string printInit(const SegmentedProgram& p) {
  std::ostringstream out;
  printInitTo(out, p);
  return out.str();
}

std::string printConstraint(const SegmentedProgram& p, std::size_t index) {
  std::ostringstream out;
  printConstraintTo(out, p, index);
  return out.str();
}

namespace {

std::string dropFirstLine(const std::string& s) {
  const auto nl = s.find('\n');
  return nl == std::string::npos ? std::string() : s.substr(nl + 1);
}

void printOptionsTo(std::ostringstream& out, const SegmentedProgram& p) {
  Printer pr(*p.scope);
  bool first = true;
  if (p.defaultCheckType) {
    out << "#CHECK TYPE: " << checkTypeName(*p.defaultCheckType) << "\n";
    first = false;
  }
  for (const auto& o : p.options) {
    if (!first) out << "\n";
    first = false;
    out << "#OPTION " << o.label.str();
    if (o.explicitCheckType) out << " " << checkTypeName(o.checkType);
    out << ":";
    if (!o.nlCheck.empty()) out << " " << o.nlCheck;
    out << "\n";
    out << "check " << pr.expr(o.checkExpr) << "\n";
  }
}

}  // namespace

std::string printInitCode(const SegmentedProgram& p) { return dropFirstLine(printInit(p)); }

std::string printConstraintCode(const SegmentedProgram& p, std::size_t index) {
  return dropFirstLine(printConstraint(p, index));
}

std::string printOptions(const SegmentedProgram& p) {
  std::ostringstream out;
  printOptionsTo(out, p);
  return out.str();
}

std::string printProgram(const SegmentedProgram& p) {
  if (p.options.empty()) throw DslError(DslError::Kind::MissingSegment, "option");
  if (p.constraints.empty()) throw DslError(DslError::Kind::MissingSegment, "constraint");
  std::ostringstream out;
  printInitTo(out, p);
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    out << "\n";
    printConstraintTo(out, p, i);
  }
  out << "\n";
  printOptionsTo(out, p);
  return out.str();
}

}  // namespace ssv
