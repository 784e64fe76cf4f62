// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>

#include "ssv/dsl.hpp"

namespace ssv {
namespace {

// ---- lexer ----------------------------------------------------------------

struct Token {
  enum Kind { Ident, Int, Punct, End };
  Kind kind = End;
  std::string text;
  int line = 0;
  int col = 0;
};

std::vector<Token> lex(std::string_view src, int firstLine) {
  static const char* twoChar[] = {"->", "==", "!=", "<=", ">="};
  std::vector<Token> out;
  int line = firstLine;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Token::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Token::Int;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else {
      t.kind = Token::Punct;
      bool matched = false;
      for (const char* p : twoChar) {
        if (src.substr(i, 2) == p) {
          t.text = p;
          advance(2);
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (std::string_view("()[]{},:.=<>+-*").find(c) == std::string_view::npos)
          throw DslError(DslError::Kind::Syntax, std::string("unexpected character '") + c + "'",
                         {line, col});
        t.text = std::string(1, c);
        advance(1);
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

bool isStatementKeyword(const std::string& s) {
  return s == "enum" || s == "int" || s == "sort" || s == "const" || s == "fn" || s == "list" ||
         s == "assert" || s == "check";
}

// ---- syntax parser --------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool atEnd() const { return peek().kind == Token::End; }
  bool isPunct(const char* p, std::size_t k = 0) const {
    return peek(k).kind == Token::Punct && peek(k).text == p;
  }
  bool isIdent(const char* s, std::size_t k = 0) const {
    return peek(k).kind == Token::Ident && peek(k).text == s;
  }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string got = t.kind == Token::End ? "end of input" : "'" + t.text + "'";
    throw DslError(DslError::Kind::Syntax, what + ", got " + got, {t.line, t.col});
  }
  void expect(const char* p) {
    if (!isPunct(p)) fail(std::string("expected '") + p + "'");
    next();
  }
  std::string ident(const char* what = "identifier") {
    if (peek().kind != Token::Ident) fail(std::string("expected ") + what);
    return next().text;
  }
  std::int64_t intLit() {
    bool neg = false;
    if (isPunct("-")) {
      next();
      neg = true;
    }
    if (peek().kind != Token::Int) fail("expected integer literal");
    const std::string text = next().text;
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc()) fail("integer literal out of range");
    return neg ? -v : v;
  }

  Expr expr() { return comparison(); }

  Expr comparison() {
    Expr lhs = additive();
    static const std::map<std::string, Op> ops = {{"==", Op::Eq}, {"!=", Op::Neq}, {"<", Op::Lt},
                                                  {"<=", Op::Le}, {">", Op::Gt},   {">=", Op::Ge}};
    if (peek().kind == Token::Punct) {
      auto it = ops.find(peek().text);
      if (it != ops.end()) {
        Token t = next();
        Expr rhs = additive();
        if (peek().kind == Token::Punct && ops.count(peek().text))
          fail("comparisons do not chain; add parentheses");
        return node(it->second, t, {lhs, rhs});
      }
    }
    return lhs;
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (isPunct("+") || isPunct("-")) {
      Token t = next();
      lhs = node(t.text == "+" ? Op::Add : Op::Sub, t, {lhs, multiplicative()});
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = unary();
    while (isPunct("*")) {
      Token t = next();
      lhs = node(Op::Mul, t, {lhs, unary()});
    }
    return lhs;
  }

  Expr unary() {
    if (isPunct("-")) {
      Token t = next();
      if (peek().kind == Token::Int) {
        --pos_;
        auto n = std::make_shared<ExprNode>();
        n->op = Op::IntLit;
        n->value = intLit();
        n->span = {t.line, t.col};
        return n;
      }
      return node(Op::Neg, t, {unary()});
    }
    return primary();
  }

  Expr primary() {
    const Token t = peek();
    if (t.kind == Token::Int) {
      auto n = std::make_shared<ExprNode>();
      n->op = Op::IntLit;
      n->value = intLit();
      n->span = {t.line, t.col};
      return n;
    }
    if (isPunct("(")) {
      next();
      Expr e = expr();
      expect(")");
      return e;
    }
    if (isPunct("[")) return listOrComprehension();
    if (t.kind != Token::Ident) fail("expected expression");
    if (isStatementKeyword(t.text)) fail("expected expression");
    next();
    if (t.text == "True" || t.text == "False") {
      auto n = std::make_shared<ExprNode>();
      n->op = Op::BoolLit;
      n->value = t.text == "True";
      n->span = {t.line, t.col};
      return n;
    }
    if (t.text == "ForAll" || t.text == "Exists") return quantifier(t);
    if (isPunct("(")) {
      next();
      std::vector<Expr> args;
      if (!isPunct(")")) {
        args.push_back(expr());
        while (isPunct(",")) {
          next();
          if (isPunct(")")) break;
          args.push_back(expr());
        }
      }
      expect(")");
      auto n = std::make_shared<ExprNode>();
      n->op = Op::Call;
      n->name = t.text;
      n->args = std::move(args);
      n->span = {t.line, t.col};
      return n;
    }
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Name;
    n->name = t.text;
    n->span = {t.line, t.col};
    return n;
  }

  // A list literal is a Call with an empty name.
  Expr listOrComprehension() {
    const Token open = next();
    auto n = std::make_shared<ExprNode>();
    n->span = {open.line, open.col};
    if (isPunct("]")) {
      next();
      n->op = Op::Call;
      return n;
    }
    Expr first = expr();
    if (isIdent("for")) {
      n->op = Op::Comprehension;
      n->args = {first};
      while (isIdent("for")) {
        next();
        Binder b;
        b.name = ident("binder name");
        if (!isIdent("in")) fail("expected 'in'");
        next();
        if (isIdent("range") && isPunct("(", 1)) {
          next();
          next();
          b.domain = Binder::Domain::Range;
          b.lo = intLit();
          expect(",");
          b.hi = intLit();
          expect(")");
        } else {
          b.domain = Binder::Domain::Collection;
          b.collection = ident("collection name");
        }
        n->binders.push_back(std::move(b));
      }
      expect("]");
      return n;
    }
    n->op = Op::Call;
    n->args.push_back(first);
    while (isPunct(",")) {
      next();
      if (isPunct("]")) break;
      n->args.push_back(expr());
    }
    expect("]");
    return n;
  }

  Binder binder(bool requireSort) {
    Binder b;
    b.name = ident("binder name");
    if (isPunct(":")) {
      next();
      b.sortName = ident("sort name");
    } else if (requireSort) {
      fail("expected ':' and a sort");
    }
    return b;
  }

  Expr quantifier(const Token& kw) {
    auto n = std::make_shared<ExprNode>();
    n->op = kw.text == "ForAll" ? Op::ForAll : Op::Exists;
    n->span = {kw.line, kw.col};
    if (isPunct("(")) {
      next();
      if (isPunct("[")) {
        next();
        n->binders.push_back(binder(false));
        while (isPunct(",")) {
          next();
          n->binders.push_back(binder(false));
        }
        expect("]");
      } else {
        n->binders.push_back(binder(false));
      }
      expect(",");
      n->args = {expr()};
      expect(")");
      return n;
    }
    n->binders.push_back(binder(true));
    while (isPunct(",")) {
      next();
      n->binders.push_back(binder(true));
    }
    expect(".");
    n->args = {expr()};
    return n;
  }

 private:
  static Expr node(Op op, const Token& t, std::vector<Expr> args) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->args = std::move(args);
    n->span = {t.line, t.col};
    return n;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---- elaboration ----------------------------------------------------------

[[noreturn]] void error(DslError::Kind k, const std::string& what, const Expr& at) {
  throw DslError(k, what, {at->span.line, at->span.col});
}

class Elaborator {
 public:
  explicit Elaborator(const Scope& s) : s_(s) {}

  Expr run(const Expr& e) {
    switch (e->op) {
      case Op::BoolLit: return withSort(e, kBool);
      case Op::IntLit: return withSort(e, kInt);
      case Op::Name: return name(e);
      case Op::Call: return call(e);
      case Op::ForAll:
      case Op::Exists: return quantifier(e);
      case Op::Comprehension:
        error(DslError::Kind::SortMismatch, "a comprehension can only appear as an argument of "
                                            "And, Or, Sum, Distinct, AtMost or AtLeast", e);
      case Op::Eq:
      case Op::Neq: return equality(e);
      case Op::Lt:
      case Op::Le:
      case Op::Gt:
      case Op::Ge:
        return build(e->op, kBool, {asInt(run(e->args[0])), asInt(run(e->args[1]))}, e);
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
        return build(e->op, kInt, {asInt(run(e->args[0])), asInt(run(e->args[1]))}, e);
      case Op::Neg: {
        Expr x = asInt(run(e->args[0]));
        if (x->op == Op::IntLit) return withSort(mkInt(-x->value), kInt);
        return build(Op::Neg, kInt, {x}, e);
      }
      default:
        // already elaborated nodes pass through
        return e;
    }
  }

 private:
  static Expr withSort(const Expr& e, SortId sort) {
    auto n = std::make_shared<ExprNode>(*e);
    n->sort = sort;
    return n;
  }

  static Expr build(Op op, SortId sort, std::vector<Expr> args, const Expr& at,
                    std::string nm = {}) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->sort = sort;
    n->args = std::move(args);
    n->name = std::move(nm);
    if (at) n->span = at->span;
    return n;
  }

  std::string sortLabel(SortId id) const { return id < 0 ? "?" : s_.sortName(id); }

  Expr asInt(const Expr& e) {
    if (e->sort == kInt) return e;
    if (e->sort == kBool) return build(Op::Ite, kInt, {e, mkInt(1), mkInt(0)}, e);
    error(DslError::Kind::SortMismatch, "expected Int, got " + sortLabel(e->sort), e);
  }

  Expr asBool(const Expr& e) {
    if (e->sort == kBool) return e;
    error(DslError::Kind::SortMismatch, "expected Bool, got " + sortLabel(e->sort), e);
  }

  /// Coerce `b` to sort `want`, allowing only Bool -> Int.
  Expr coerce(const Expr& e, SortId want) {
    if (e->sort == want) return e;
    if (want == kInt && e->sort == kBool) return asInt(e);
    error(DslError::Kind::SortMismatch,
          "expected " + sortLabel(want) + ", got " + sortLabel(e->sort), e);
  }

  const Binder* bound(const std::string& n) const {
    for (auto it = env_.rbegin(); it != env_.rend(); ++it)
      if (it->name == n) return &*it;
    return nullptr;
  }

  Expr name(const Expr& e) {
    if (const Binder* b = bound(e->name)) return build(Op::Var, b->sort, {}, e, e->name);
    const Symbol* sym = s_.lookup(e->name);
    if (!sym) error(DslError::Kind::UnknownSymbol, "unknown symbol '" + e->name + "'", e);
    switch (sym->kind) {
      case Symbol::Kind::Member: {
        Expr n = build(Op::Member, sym->index, {}, e, e->name);
        std::const_pointer_cast<ExprNode>(n)->value = sym->member;
        return n;
      }
      case Symbol::Kind::Sort:
        error(DslError::Kind::SortMismatch, "sort '" + e->name + "' used as a value", e);
      case Symbol::Kind::Decl: {
        const Decl& d = s_.decl(sym->index);
        if (d.kind == Decl::Kind::Constant)
          return build(Op::Const, s_.canonical(d.result), {}, e, e->name);
        if (d.kind == Decl::Kind::Function)
          error(DslError::Kind::ArityMismatch,
                "function '" + e->name + "' takes " + std::to_string(d.argSorts.size()) +
                    " argument(s)",
                e);
        error(DslError::Kind::SortMismatch,
              "collection '" + e->name + "' can only be used in a variadic argument position", e);
      }
    }
    error(DslError::Kind::UnknownSymbol, e->name, e);
  }

  Expr equality(const Expr& e) {
    Expr l = run(e->args[0]);
    Expr r = run(e->args[1]);
    const bool neq = e->op == Op::Neq;
    // x == True -> x, x == False -> Not(x)
    auto lit = [&](const Expr& term, const Expr& b) -> Expr {
      const bool positive = (b->value != 0) != neq;
      return positive ? term : build(Op::Not, kBool, {term}, e);
    };
    if (r->op == Op::BoolLit && l->sort == kBool) return lit(l, r);
    if (l->op == Op::BoolLit && r->sort == kBool) return lit(r, l);
    if (l->sort != r->sort) {
      if ((l->sort == kBool && r->sort == kInt) || (l->sort == kInt && r->sort == kBool)) {
        l = asInt(l);
        r = asInt(r);
      } else {
        error(DslError::Kind::SortMismatch,
              "cannot compare " + sortLabel(l->sort) + " with " + sortLabel(r->sort), e);
      }
    }
    return build(e->op, kBool, {l, r}, e);
  }

  Expr quantifier(const Expr& e) {
    std::vector<Binder> binders;
    for (Binder b : e->binders) {
      if (b.sortName.empty()) {
        const Symbol* sym = s_.lookup(b.name);
        if (!sym || sym->kind != Symbol::Kind::Decl ||
            s_.decl(sym->index).kind != Decl::Kind::Constant)
          error(DslError::Kind::UnknownSymbol,
                "quantified variable '" + b.name + "' needs a sort (write " + b.name + ": S)", e);
        b.sortName = s_.decl(sym->index).resultSortName;
        b.sort = s_.canonical(s_.decl(sym->index).result);
      } else {
        const Symbol* sym = s_.lookup(b.sortName);
        if (!sym || sym->kind != Symbol::Kind::Sort)
          error(DslError::Kind::UnknownSymbol, "unknown sort '" + b.sortName + "'", e);
        b.sort = s_.canonical(sym->index);
      }
      b.domain = Binder::Domain::Sort;
      binders.push_back(b);
    }
    if (binders.empty()) error(DslError::Kind::Syntax, "quantifier without variables", e);
    const std::size_t mark = env_.size();
    env_.insert(env_.end(), binders.begin(), binders.end());
    Expr body = asBool(run(e->args.at(0)));
    env_.resize(mark);
    auto n = std::const_pointer_cast<ExprNode>(build(e->op, kBool, {body}, e));
    n->binders = std::move(binders);
    return n;
  }

  Expr comprehension(const Expr& e) {
    std::vector<Binder> binders;
    const std::size_t mark = env_.size();
    for (Binder b : e->binders) {
      if (b.domain == Binder::Domain::Range) {
        b.sort = kInt;
      } else {
        const Symbol* sym = s_.lookup(b.collection);
        if (const Binder* outer = bound(b.collection)) {
          (void)outer;
          error(DslError::Kind::UnboundedComprehension,
                "'" + b.collection + "' is a variable, not a finite collection", e);
        }
        if (!sym) error(DslError::Kind::UnknownSymbol, "unknown collection '" + b.collection + "'", e);
        if (sym->kind == Symbol::Kind::Sort) {
          if (!s_.isFinite(s_.canonical(sym->index)))
            error(DslError::Kind::UnboundedComprehension,
                  "comprehension over non-finite sort '" + b.collection + "'", e);
          b.domain = Binder::Domain::Sort;
          b.sort = sym->index;
          b.sortName = b.collection;
          b.collection.clear();
        } else if (sym->kind == Symbol::Kind::Decl &&
                   s_.decl(sym->index).kind == Decl::Kind::Collection) {
          b.sort = s_.canonical(s_.decl(sym->index).result);
        } else {
          error(DslError::Kind::UnboundedComprehension,
                "'" + b.collection + "' is not a finite collection", e);
        }
      }
      binders.push_back(b);
      env_.push_back(b);
    }
    Expr tmpl = run(e->args.at(0));
    env_.resize(mark);
    auto n = std::const_pointer_cast<ExprNode>(build(Op::Comprehension, tmpl->sort, {tmpl}, e));
    n->binders = std::move(binders);
    return n;
  }

  /// Flatten list literals, comprehensions and bare collections in a variadic position.
  std::vector<Expr> items(const std::vector<Expr>& args) {
    std::vector<Expr> out;
    for (const auto& a : args) {
      if (a->op == Op::Call && a->name.empty()) {
        auto inner = items(a->args);
        out.insert(out.end(), inner.begin(), inner.end());
      } else if (a->op == Op::Comprehension) {
        out.push_back(comprehension(a));
      } else if (a->op == Op::Name && !bound(a->name) && isCollection(a->name)) {
        auto c = std::make_shared<ExprNode>();
        c->op = Op::Comprehension;
        c->span = a->span;
        auto v = std::make_shared<ExprNode>();
        v->op = Op::Name;
        v->name = "_e";
        v->span = a->span;
        c->args = {v};
        Binder b;
        b.name = "_e";
        b.domain = Binder::Domain::Collection;
        b.collection = a->name;
        c->binders = {b};
        out.push_back(comprehension(c));
      } else {
        out.push_back(run(a));
      }
    }
    return out;
  }

  bool isCollection(const std::string& n) const {
    const Symbol* sym = s_.lookup(n);
    return sym && sym->kind == Symbol::Kind::Decl &&
           s_.decl(sym->index).kind == Decl::Kind::Collection;
  }

  template <class F>
  Expr mapItem(const Expr& item, F&& f) {
    if (item->op != Op::Comprehension) return f(item);
    auto n = std::make_shared<ExprNode>(*item);
    n->args = {f(item->args[0])};
    n->sort = n->args[0]->sort;
    return n;
  }

  Expr call(const Expr& e) {
    const std::string& fn = e->name;
    if (fn.empty()) error(DslError::Kind::SortMismatch, "a list can only appear as an argument", e);
    auto arity = [&](std::size_t n) {
      if (e->args.size() != n)
        error(DslError::Kind::ArityMismatch,
              fn + " takes " + std::to_string(n) + " argument(s), got " +
                  std::to_string(e->args.size()),
              e);
    };
    if (fn == "And" || fn == "Or") {
      std::vector<Expr> xs = items(e->args);
      for (auto& x : xs) x = mapItem(x, [&](const Expr& y) { return asBool(y); });
      return build(fn == "And" ? Op::And : Op::Or, kBool, std::move(xs), e);
    }
    if (fn == "Not") {
      arity(1);
      return build(Op::Not, kBool, {asBool(run(e->args[0]))}, e);
    }
    if (fn == "Implies" || fn == "Xor") {
      arity(2);
      return build(fn == "Implies" ? Op::Implies : Op::Xor, kBool,
                   {asBool(run(e->args[0])), asBool(run(e->args[1]))}, e);
    }
    if (fn == "If") {
      arity(3);
      Expr c = asBool(run(e->args[0]));
      Expr a = run(e->args[1]);
      Expr b = run(e->args[2]);
      if (a->sort != b->sort) {
        if ((a->sort == kBool || a->sort == kInt) && (b->sort == kBool || b->sort == kInt)) {
          a = asInt(a);
          b = asInt(b);
        } else {
          error(DslError::Kind::SortMismatch, "If branches have different sorts", e);
        }
      }
      return build(Op::Ite, a->sort, {c, a, b}, e);
    }
    if (fn == "Sum") {
      std::vector<Expr> xs = items(e->args);
      for (auto& x : xs) x = mapItem(x, [&](const Expr& y) { return asInt(y); });
      return build(Op::Sum, kInt, std::move(xs), e);
    }
    if (fn == "Distinct") {
      std::vector<Expr> xs = items(e->args);
      for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i]->sort != xs[0]->sort)
          error(DslError::Kind::SortMismatch, "Distinct arguments have different sorts", e);
      return build(Op::Distinct, kBool, std::move(xs), e);
    }
    if (fn == "AtMost" || fn == "AtLeast") {
      if (e->args.size() < 2)
        error(DslError::Kind::ArityMismatch, fn + " needs terms and a bound", e);
      std::vector<Expr> terms(e->args.begin(), e->args.end() - 1);
      std::vector<Expr> xs = items(terms);
      for (auto& x : xs) x = mapItem(x, [&](const Expr& y) { return asInt(asBool(y)); });
      Expr k = asInt(run(e->args.back()));
      return build(fn == "AtMost" ? Op::Le : Op::Ge, kBool,
                   {build(Op::Sum, kInt, std::move(xs), e), k}, e);
    }
    if (fn == "Abs") {
      arity(1);
      Expr x = asInt(run(e->args[0]));
      Expr neg = x->op == Op::IntLit ? mkInt(-x->value) : build(Op::Neg, kInt, {x}, e);
      return build(Op::Ite, kInt, {build(Op::Ge, kBool, {x, mkInt(0)}, e), x, neg}, e);
    }
    if (fn == "ForAll" || fn == "Exists")
      error(DslError::Kind::Syntax, fn + " expects a binder list", e);

    const Symbol* sym = s_.lookup(fn);
    if (bound(fn) || (sym && !(sym->kind == Symbol::Kind::Decl &&
                               s_.decl(sym->index).kind == Decl::Kind::Function)))
      error(DslError::Kind::ArityMismatch, "'" + fn + "' is not a function", e);
    if (!sym) error(DslError::Kind::UnknownSymbol, "unknown function '" + fn + "'", e);
    const Decl& d = s_.decl(sym->index);
    if (e->args.size() != d.argSorts.size())
      error(DslError::Kind::ArityMismatch,
            fn + " takes " + std::to_string(d.argSorts.size()) + " argument(s), got " +
                std::to_string(e->args.size()),
            e);
    std::vector<Expr> args;
    for (std::size_t i = 0; i < e->args.size(); ++i)
      args.push_back(coerce(run(e->args[i]), s_.canonical(d.argSorts[i])));
    return build(Op::Apply, s_.canonical(d.result), std::move(args), e, fn);
  }

  const Scope& s_;
  std::vector<Binder> env_;
};

// ---- program parsing ------------------------------------------------------

struct Chunk {
  std::string text;
  int firstLine = 1;
};

struct RawSegment {
  enum Kind { Init, Constraint, Option } kind = Init;
  std::string nl;
  int line = 0;
  std::optional<OptionLabel> label;
  std::optional<CheckType> checkType;
  std::vector<Chunk> chunks;
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool startsWith(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

/// Text after an optional ':'.
std::string afterColon(std::string_view rest) {
  std::string r = trim(rest);
  if (!r.empty() && r[0] == ':') r = trim(std::string_view(r).substr(1));
  return r;
}

class ProgramParser {
 public:
  SegmentedProgram parse(std::string_view source) {
    split(source);
    auto scope = std::make_shared<Scope>();
    scope_ = scope.get();
    SegmentedProgram p;
    bool sawInit = false;
    for (auto& seg : segs_) {
      switch (seg.kind) {
        case RawSegment::Init: {
          sawInit = sawInit || seg.line > 0 || hasCode(seg);
          p.init.nlContext = seg.nl;
          p.init.hasMarker = seg.line > 0;
          for (const auto& c : seg.chunks)
            statements(c, "init", p.init.sortIds, p.init.declIds, &p.init.preconditions, nullptr);
          break;
        }
        case RawSegment::Constraint: {
          ConstraintSegment cs;
          cs.nlText = seg.nl;
          if (cs.nlText.empty())
            throw DslError(DslError::Kind::Syntax, "constraint marker without a description",
                           {seg.line, 1});
          for (const auto& c : seg.chunks)
            statements(c, "constraint", cs.sortIds, cs.declIds, &cs.exprs, nullptr);
          if (cs.exprs.empty())
            throw DslError(DslError::Kind::Syntax, "constraint segment has no assert",
                           {seg.line, 1});
          p.constraints.push_back(std::move(cs));
          break;
        }
        case RawSegment::Option: {
          OptionSegment os;
          os.label = *seg.label;
          os.nlCheck = seg.nl;
          os.explicitCheckType = seg.checkType.has_value();
          if (seg.checkType) os.checkType = *seg.checkType;
          for (const auto& o : p.options)
            if (o.label == os.label)
              throw DslError(DslError::Kind::DuplicateOptionLabel,
                             "option " + os.label.str() + " appears twice", {seg.line, 1});
          std::vector<int> sorts, decls;
          std::vector<Expr> checks;
          for (const auto& c : seg.chunks) statements(c, "option", sorts, decls, nullptr, &checks);
          if (!sorts.empty() || !decls.empty())
            throw DslError(DslError::Kind::Syntax, "declarations are not allowed in an option",
                           {seg.line, 1});
          if (checks.empty())
            throw DslError(DslError::Kind::Syntax, "option segment has no check", {seg.line, 1});
          os.checkExpr = mkAnd(std::move(checks));
          p.options.push_back(std::move(os));
          break;
        }
      }
    }
    if (!sawInit) throw DslError(DslError::Kind::MissingSegment, "init");
    if (p.constraints.empty()) throw DslError(DslError::Kind::MissingSegment, "constraint");
    if (p.options.empty()) throw DslError(DslError::Kind::MissingSegment, "option");
    p.defaultCheckType = defaultCheck_;
    for (auto& o : p.options)
      if (!o.explicitCheckType) o.checkType = defaultCheck_.value_or(CheckType::Sat);
    p.scope = std::move(scope);
    return p;
  }

 private:
  static bool hasCode(const RawSegment& s) {
    for (const auto& c : s.chunks)
      if (lex(c.text, c.firstLine).size() > 1) return true;
    return false;
  }

  void split(std::string_view source) {
    segs_.push_back(RawSegment{});  // code before the first marker belongs to init
    int lineNo = 0;
    std::size_t start = 0;
    while (start <= source.size()) {
      std::size_t end = source.find('\n', start);
      if (end == std::string_view::npos) end = source.size();
      std::string_view line = source.substr(start, end - start);
      ++lineNo;
      if (!marker(line, lineNo)) {
        auto& chunks = segs_.back().chunks;
        if (chunks.empty() || chunks.back().firstLine + lines(chunks.back().text) != lineNo)
          chunks.push_back({std::string(line), lineNo});
        else
          chunks.back().text += "\n" + std::string(line);
      }
      if (end == source.size()) break;
      start = end + 1;
    }
  }

  static int lines(const std::string& s) {
    return 1 + static_cast<int>(std::count(s.begin(), s.end(), '\n'));
  }

  bool marker(std::string_view raw, int lineNo) {
    std::string line = trim(raw);
    if (line.empty() || line[0] != '#') return false;
    std::string_view body = std::string_view(line).substr(1);
    while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
    if (startsWith(body, "INIT")) {
      std::string rest(body.substr(4));
      if (!rest.empty() && std::isalnum(static_cast<unsigned char>(rest[0]))) return false;
      // code before the marker and the marked init segment are one segment
      if (segs_.size() != 1 || segs_.front().line != 0)
        throw DslError(DslError::Kind::Syntax, "INIT marker must come first", {lineNo, 1});
      segs_.front().nl = afterColon(rest);
      segs_.front().line = lineNo;
      return true;
    }
    if (startsWith(body, "CONSTRAINT")) {
      std::string rest(body.substr(10));
      if (!rest.empty() && std::isalnum(static_cast<unsigned char>(rest[0]))) return false;
      RawSegment s;
      s.kind = RawSegment::Constraint;
      s.nl = afterColon(rest);
      s.line = lineNo;
      segs_.push_back(std::move(s));
      return true;
    }
    if (startsWith(body, "CHECK PROPERTY")) {
      // describes the enclosing option when its marker line carries no text
      if (segs_.back().kind == RawSegment::Option && segs_.back().nl.empty())
        segs_.back().nl = afterColon(body.substr(14));
      return true;
    }
    if (startsWith(body, "CHECK TYPE")) {
      std::string text = afterColon(body.substr(10));
      defaultCheck_ = sniffCheckType(text);
      if (!defaultCheck_)
        throw DslError(DslError::Kind::Syntax, "cannot read check type from '" + text + "'",
                       {lineNo, 1});
      return true;
    }
    if (startsWith(body, "OPTION")) {
      std::string_view rest = body.substr(6);
      if (!rest.empty() && std::isalnum(static_cast<unsigned char>(rest[0]))) return false;
      std::size_t i = 0;
      auto skip = [&] {
        while (i < rest.size() && rest[i] == ' ') ++i;
      };
      skip();
      bool paren = i < rest.size() && rest[i] == '(';
      if (paren) ++i;
      if (i >= rest.size() || !std::isalpha(static_cast<unsigned char>(rest[i])))
        throw DslError(DslError::Kind::Syntax, "option marker without a label", {lineNo, 1});
      RawSegment s;
      s.kind = RawSegment::Option;
      s.line = lineNo;
      try {
        s.label = normalizeLabel(std::string(1, rest[i]));
      } catch (const LabelError&) {
        throw DslError(DslError::Kind::Syntax, "bad option label", {lineNo, 1});
      }
      ++i;
      if (paren) {
        if (i >= rest.size() || rest[i] != ')')
          throw DslError(DslError::Kind::Syntax, "expected ')' after option label", {lineNo, 1});
        ++i;
      }
      skip();
      std::size_t j = i;
      while (j < rest.size() && std::isalpha(static_cast<unsigned char>(rest[j]))) ++j;
      if (j > i) {
        s.checkType = checkTypeFromString(rest.substr(i, j - i));
        if (!s.checkType)
          throw DslError(DslError::Kind::Syntax,
                         "unknown check type '" + std::string(rest.substr(i, j - i)) + "'",
                         {lineNo, 1});
        i = j;
      }
      s.nl = afterColon(rest.substr(i));
      segs_.push_back(std::move(s));
      return true;
    }
    return false;
  }

  /// "sat", "valid" or a sentence mentioning is_valid()/is_sat()/is_unsat().
  static std::optional<CheckType> sniffCheckType(const std::string& text) {
    if (auto t = checkTypeFromString(text)) return t;
    for (const char* k : {"is_unsat", "is_valid", "is_sat"})
      if (text.find(k) != std::string::npos) return checkTypeFromString(k);
    return std::nullopt;
  }

  void statements(const Chunk& chunk, const char* where, std::vector<int>& sortIds,
                  std::vector<int>& declIds, std::vector<Expr>* asserts,
                  std::vector<Expr>* checks) {
    Parser ps(lex(chunk.text, chunk.firstLine));
    while (!ps.atEnd()) {
      const Token kw = ps.peek();
      if (kw.kind != Token::Ident || !isStatementKeyword(kw.text))
        ps.fail("expected a statement (enum, int, sort, const, fn, list, assert, check)");
      ps.next();
      const Span span{kw.line, kw.col};
      if (kw.text == "enum") {
        SortDecl s;
        s.name = ps.ident("sort name");
        s.kind = SortDecl::Kind::Enum;
        if (ps.isPunct("=")) ps.next();
        ps.expect("{");
        while (!ps.isPunct("}")) {
          s.members.push_back(ps.ident("member name"));
          if (!ps.isPunct(",")) break;
          ps.next();
        }
        ps.expect("}");
        sortIds.push_back(scope_->addSort(std::move(s), span));
      } else if (kw.text == "int" || kw.text == "sort") {
        SortDecl s;
        s.name = ps.ident("sort name");
        s.kind = kw.text == "int" ? SortDecl::Kind::IntAlias : SortDecl::Kind::Uninterpreted;
        sortIds.push_back(scope_->addSort(std::move(s), span));
      } else if (kw.text == "const") {
        std::vector<std::string> names{ps.ident("constant name")};
        while (ps.isPunct(",")) {
          ps.next();
          names.push_back(ps.ident("constant name"));
        }
        ps.expect(":");
        const std::string sortName = ps.ident("sort name");
        const SortId sort = sortRef(sortName, span);
        for (auto& n : names) {
          Decl d;
          d.kind = Decl::Kind::Constant;
          d.name = n;
          d.result = sort;
          d.resultSortName = sortName;
          declIds.push_back(scope_->addDecl(std::move(d), span));
        }
      } else if (kw.text == "fn") {
        Decl d;
        d.name = ps.ident("function name");
        ps.expect("(");
        while (!ps.isPunct(")")) {
          const std::string sn = ps.ident("sort name");
          d.argSortNames.push_back(sn);
          d.argSorts.push_back(sortRef(sn, span));
          if (!ps.isPunct(",")) break;
          ps.next();
        }
        ps.expect(")");
        ps.expect("->");
        d.resultSortName = ps.ident("sort name");
        d.result = sortRef(d.resultSortName, span);
        d.kind = d.argSorts.empty() ? Decl::Kind::Constant : Decl::Kind::Function;
        declIds.push_back(scope_->addDecl(std::move(d), span));
      } else if (kw.text == "list") {
        declIds.push_back(collection(ps, span));
      } else {
        const bool isCheck = kw.text == "check";
        Expr e = Elaborator(*scope_).run(ps.expr());
        if (e->sort != kBool)
          throw DslError(DslError::Kind::SortMismatch,
                         kw.text + " expects a Bool expression", {span.line, span.col});
        if (checks) {
          checks->push_back(e);
        } else if (isCheck) {
          throw DslError(DslError::Kind::Syntax,
                         std::string("'check' is only allowed in option segments, not ") + where,
                         {span.line, span.col});
        } else {
          asserts->push_back(e);
        }
      }
    }
  }

  SortId sortRef(const std::string& name, Span span) {
    const Symbol* sym = scope_->lookup(name);
    if (!sym) throw DslError(DslError::Kind::UnknownSymbol, "unknown sort '" + name + "'",
                             {span.line, span.col});
    if (sym->kind != Symbol::Kind::Sort)
      throw DslError(DslError::Kind::SortMismatch, "'" + name + "' is not a sort",
                     {span.line, span.col});
    return sym->index;
  }

  int collection(Parser& ps, Span span) {
    Decl d;
    d.kind = Decl::Kind::Collection;
    d.name = ps.ident("list name");
    if (ps.isPunct(":")) {
      ps.next();
      d.resultSortName = ps.ident("sort name");
      d.result = sortRef(d.resultSortName, span);
    }
    ps.expect("=");
    if (ps.isIdent("range")) {
      ps.next();
      ps.expect("(");
      d.isRange = true;
      d.lo = ps.intLit();
      ps.expect(",");
      d.hi = ps.intLit();
      ps.expect(")");
      if (d.result == kNoSort) {
        d.result = kInt;
        d.resultSortName = "Int";
      }
    } else {
      ps.expect("[");
      while (!ps.isPunct("]")) {
        Expr el = Elaborator(*scope_).run(ps.expr());
        if (el->op != Op::Member && el->op != Op::Const && el->op != Op::IntLit &&
            el->op != Op::BoolLit)
          throw DslError(DslError::Kind::SortMismatch,
                         "list elements must be constants or literals", {span.line, span.col});
        if (d.result == kNoSort) {
          d.result = el->sort;
          d.resultSortName = scope_->sortName(el->sort);
        } else if (scope_->canonical(d.result) != el->sort) {
          throw DslError(DslError::Kind::SortMismatch,
                         "list '" + d.name + "' mixes element sorts", {span.line, span.col});
        }
        d.elements.push_back(el);
        if (!ps.isPunct(",")) break;
        ps.next();
      }
      ps.expect("]");
      if (d.result == kNoSort)
        throw DslError(DslError::Kind::Syntax,
                       "empty list '" + d.name + "' needs a sort (list " + d.name + ": S = [])",
                       {span.line, span.col});
    }
    return scope_->addDecl(std::move(d), span);
  }

  std::vector<RawSegment> segs_;
  std::optional<CheckType> defaultCheck_;
  Scope* scope_ = nullptr;
};

}  // namespace

Expr parseExprSyntax(std::string_view source) {
  Parser ps(lex(source, 1));
  Expr e = ps.expr();
  if (!ps.atEnd()) ps.fail("unexpected trailing input");
  return e;
}

Expr elaborate(const Expr& syntax, const Scope& scope) { return Elaborator(scope).run(syntax); }

Expr parseExpr(std::string_view source, const Scope& scope) {
  return elaborate(parseExprSyntax(source), scope);
}

SegmentedProgram parseProgram(std::string_view source) { return ProgramParser().parse(source); }

}  // namespace ssv
