// SPDX-License-Identifier: Apache-2.0
#include "ssv/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <thread>
#include <unordered_set>

namespace ssv {
namespace {

struct Node {
  Op op = Op::BoolLit;
  std::int64_t v = 0;
  int slot = -1;  // Const: state slot, Var: variable index, Apply: base slot
  std::vector<int> kids;
  std::vector<std::int64_t> strides;       // Apply
  std::vector<int> vars;                   // quantifier/comprehension variables
  std::vector<std::int64_t> sizes;         // quantifier domain sizes
  std::vector<std::vector<int>> elements;  // comprehension: element nodes per binder
  std::vector<char> isComp;                // variadic: which kids are comprehensions
};

/// Flat layout of all constant/function tables of a scope.
struct Layout {
  std::vector<std::int64_t> offset;  // per decl, -1 for collections
  std::vector<std::int64_t> count;   // slots per decl
  std::vector<std::int64_t> domain;  // values per slot, per decl
  std::int64_t totalSlots = 0;
  bool finite = true;

  explicit Layout(const Scope& s) {
    for (const auto& d : s.decls()) {
      if (d.kind == Decl::Kind::Collection) {
        offset.push_back(-1);
        count.push_back(0);
        domain.push_back(0);
        continue;
      }
      std::int64_t n = 1;
      for (SortId a : d.argSorts) {
        SortId c = s.canonical(a);
        if (!s.isFinite(c)) {
          finite = false;
          n = 0;
          break;
        }
        n *= static_cast<std::int64_t>(s.domainSize(c));
        if (n > (std::int64_t{1} << 40)) finite = false;
      }
      SortId r = s.canonical(d.result);
      if (!s.isFinite(r)) finite = false;
      offset.push_back(totalSlots);
      count.push_back(finite ? n : 0);
      domain.push_back(finite ? static_cast<std::int64_t>(s.domainSize(r)) : 0);
      totalSlots += finite ? n : 0;
    }
  }
};

class Compiler {
 public:
  Compiler(const Scope& s, const Layout& l) : s_(s), l_(l) {}

  std::vector<Node> nodes;
  int varCount = 0;
  std::set<int> referenced;  // decl indices
  bool supported = true;

  int compile(const Expr& e) {
    Node n;
    n.op = e->op;
    switch (e->op) {
      case Op::BoolLit:
      case Op::IntLit:
      case Op::Member: n.v = e->value; break;
      case Op::Var:
        n.slot = lookupVar(e->name);
        if (n.slot < 0) {
          supported = false;
          n.slot = 0;
        }
        break;
      case Op::Const: {
        const int d = declIndex(e->name);
        referenced.insert(d);
        n.slot = static_cast<int>(l_.offset[d]);
        break;
      }
      case Op::Apply: {
        const int d = declIndex(e->name);
        referenced.insert(d);
        n.slot = static_cast<int>(l_.offset[d]);
        const Decl& decl = s_.decl(d);
        std::int64_t stride = 1;
        n.strides.assign(decl.argSorts.size(), 0);
        for (std::size_t i = decl.argSorts.size(); i-- > 0;) {
          n.strides[i] = stride;
          SortId c = s_.canonical(decl.argSorts[i]);
          stride *= s_.isFinite(c) ? static_cast<std::int64_t>(s_.domainSize(c)) : 1;
        }
        for (const auto& a : e->args) n.kids.push_back(compile(a));
        break;
      }
      case Op::ForAll:
      case Op::Exists: {
        const std::size_t mark = env_.size();
        for (const auto& b : e->binders) {
          if (!s_.isFinite(b.sort)) {
            supported = false;
            n.sizes.push_back(0);
          } else {
            n.sizes.push_back(static_cast<std::int64_t>(s_.domainSize(b.sort)));
          }
          n.vars.push_back(varCount);
          env_.emplace_back(b.name, varCount++);
        }
        n.kids.push_back(compile(e->args[0]));
        env_.resize(mark);
        break;
      }
      case Op::Comprehension:
        supported = false;
        break;
      case Op::Name:
      case Op::Call:
        supported = false;
        break;
      default:
        if (isVariadic(e->op)) {
          for (const auto& a : e->args) {
            if (a->op == Op::Comprehension) {
              n.kids.push_back(compileComprehension(a));
              n.isComp.push_back(1);
            } else {
              n.kids.push_back(compile(a));
              n.isComp.push_back(0);
            }
          }
        } else {
          for (const auto& a : e->args) n.kids.push_back(compile(a));
        }
        break;
    }
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  static bool isVariadic(Op op) {
    return op == Op::And || op == Op::Or || op == Op::Sum || op == Op::Distinct;
  }

 private:
  int declIndex(const std::string& name) {
    const Symbol* sym = s_.lookup(name);
    if (!sym || sym->kind != Symbol::Kind::Decl) {
      supported = false;
      return 0;
    }
    return sym->index;
  }

  int lookupVar(const std::string& name) const {
    for (auto it = env_.rbegin(); it != env_.rend(); ++it)
      if (it->first == name) return it->second;
    return -1;
  }

  int compileComprehension(const Expr& c) {
    Node n;
    n.op = Op::Comprehension;
    const std::size_t mark = env_.size();
    for (const auto& b : c->binders) {
      std::vector<int> elems;
      auto literal = [&](Op op, std::int64_t v) {
        Node k;
        k.op = op;
        k.v = v;
        nodes.push_back(k);
        elems.push_back(static_cast<int>(nodes.size()) - 1);
      };
      switch (b.domain) {
        case Binder::Domain::Range:
          for (std::int64_t i = b.lo; i < b.hi; ++i) literal(Op::IntLit, i);
          break;
        case Binder::Domain::Sort:
          if (!s_.isFinite(b.sort)) {
            supported = false;
            break;
          }
          for (std::size_t m = 0; m < s_.domainSize(b.sort); ++m)
            literal(Op::IntLit, static_cast<std::int64_t>(m));
          break;
        case Binder::Domain::Collection: {
          const Symbol* sym = s_.lookup(b.collection);
          if (!sym || sym->kind != Symbol::Kind::Decl) {
            supported = false;
            break;
          }
          const Decl& d = s_.decl(sym->index);
          if (d.isRange) {
            for (std::int64_t i = d.lo; i < d.hi; ++i) literal(Op::IntLit, i);
          } else {
            // elements are evaluated in the outer environment
            for (const auto& el : d.elements) elems.push_back(compile(el));
          }
          break;
        }
      }
      n.elements.push_back(std::move(elems));
      n.vars.push_back(varCount);
      env_.emplace_back(b.name, varCount++);
    }
    n.kids.push_back(compile(c->args[0]));
    env_.resize(mark);
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  const Scope& s_;
  const Layout& l_;
  std::vector<std::pair<std::string, int>> env_;
};

class Machine {
 public:
  Machine(const std::vector<Node>& nodes, int vars)
      : nodes_(nodes), vars_(static_cast<std::size_t>(std::max(vars, 1)), 0) {}

  const std::int64_t* state = nullptr;

  std::int64_t eval(int i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::BoolLit:
      case Op::IntLit:
      case Op::Member: return n.v;
      case Op::Var: return vars_[n.slot];
      case Op::Const: return state[n.slot];
      case Op::Apply: {
        std::int64_t idx = n.slot;
        for (std::size_t k = 0; k < n.kids.size(); ++k) idx += eval(n.kids[k]) * n.strides[k];
        return state[idx];
      }
      case Op::Eq: return eval(n.kids[0]) == eval(n.kids[1]);
      case Op::Neq: return eval(n.kids[0]) != eval(n.kids[1]);
      case Op::Lt: return eval(n.kids[0]) < eval(n.kids[1]);
      case Op::Le: return eval(n.kids[0]) <= eval(n.kids[1]);
      case Op::Gt: return eval(n.kids[0]) > eval(n.kids[1]);
      case Op::Ge: return eval(n.kids[0]) >= eval(n.kids[1]);
      case Op::Add: return eval(n.kids[0]) + eval(n.kids[1]);
      case Op::Sub: return eval(n.kids[0]) - eval(n.kids[1]);
      case Op::Mul: return eval(n.kids[0]) * eval(n.kids[1]);
      case Op::Neg: return -eval(n.kids[0]);
      case Op::Not: return !eval(n.kids[0]);
      case Op::Implies: return !eval(n.kids[0]) || eval(n.kids[1]);
      case Op::Xor: return (eval(n.kids[0]) != 0) != (eval(n.kids[1]) != 0);
      case Op::Ite: return eval(n.kids[0]) ? eval(n.kids[1]) : eval(n.kids[2]);
      case Op::And: {
        bool all = true;
        each(n, [&](std::int64_t v) { return (all = v != 0); });
        return all;
      }
      case Op::Or: {
        bool any = false;
        each(n, [&](std::int64_t v) { return !(any = v != 0); });
        return any;
      }
      case Op::Sum: {
        std::int64_t total = 0;
        each(n, [&](std::int64_t v) {
          total += v;
          return true;
        });
        return total;
      }
      case Op::Distinct: {
        std::vector<std::int64_t> seen;
        each(n, [&](std::int64_t v) {
          seen.push_back(v);
          return true;
        });
        std::sort(seen.begin(), seen.end());
        return std::adjacent_find(seen.begin(), seen.end()) == seen.end();
      }
      case Op::ForAll:
      case Op::Exists: return quantifier(n, 0);
      default: return 0;
    }
  }

 private:
  bool quantifier(const Node& n, std::size_t k) {
    const bool forall = n.op == Op::ForAll;
    if (k == n.vars.size()) return eval(n.kids[0]) != 0;
    for (std::int64_t v = 0; v < n.sizes[k]; ++v) {
      vars_[n.vars[k]] = v;
      if (quantifier(n, k + 1) != forall) return !forall;
    }
    return forall;
  }

  // Calls f on each item value; stops when f returns false.
  template <class F>
  void each(const Node& n, F&& f) {
    for (std::size_t k = 0; k < n.kids.size(); ++k) {
      if (n.isComp.empty() || !n.isComp[k]) {
        if (!f(eval(n.kids[k]))) return;
      } else if (!comprehension(nodes_[n.kids[k]], 0, f)) {
        return;
      }
    }
  }

  template <class F>
  bool comprehension(const Node& c, std::size_t b, F& f) {
    if (b == c.vars.size()) return f(eval(c.kids[0]));
    for (int el : c.elements[b]) {
      vars_[c.vars[b]] = eval(el);
      if (!comprehension(c, b + 1, f)) return false;
    }
    return true;
  }

  const std::vector<Node>& nodes_;
  std::vector<std::int64_t> vars_;
};

struct Plan {
  Layout layout;
  std::vector<Node> nodes;
  std::vector<int> roots;
  int vars = 0;
  bool supported = true;
  bool capExceeded = false;
  std::vector<std::int64_t> slots;   // enumerated state slots
  std::vector<std::int64_t> radix;   // domain size per enumerated slot
  std::uint64_t enumerated = 1;      // product of radix
  std::uint64_t multiplier = 1;      // states of unreferenced symbols
  std::uint64_t total = 1;

  Plan(const Scope& s, const std::vector<Expr>& exprs, const OracleOptions& opts) : layout(s) {
    if (!layout.finite) {
      supported = false;
      return;
    }
    Compiler c(s, layout);
    for (const auto& e : exprs) roots.push_back(c.compile(e));
    nodes = std::move(c.nodes);
    vars = c.varCount;
    supported = c.supported;
    if (!supported) return;
    const long double cap = static_cast<long double>(opts.cap);
    long double all = 1;
    for (std::size_t d = 0; d < s.decls().size(); ++d) {
      if (layout.offset[d] < 0) continue;
      const bool ref = c.referenced.count(static_cast<int>(d)) > 0;
      for (std::int64_t k = 0; k < layout.count[d]; ++k) {
        all *= static_cast<long double>(layout.domain[d]);
        if (all > cap) {
          supported = false;
          capExceeded = true;
          return;
        }
        if (ref) {
          slots.push_back(layout.offset[d] + k);
          radix.push_back(layout.domain[d]);
          enumerated *= static_cast<std::uint64_t>(layout.domain[d]);
        } else {
          multiplier *= static_cast<std::uint64_t>(layout.domain[d]);
        }
      }
    }
    total = enumerated * multiplier;
  }
};

/// Enumerate [lo, hi) of the referenced-slot space. Returns matches; stops at the first
/// when `firstOnly`.
std::uint64_t scan(const Plan& p, std::uint64_t lo, std::uint64_t hi, bool firstOnly,
                   std::atomic<bool>& found, std::vector<std::int64_t>* witness) {
  std::vector<std::int64_t> state(static_cast<std::size_t>(std::max<std::int64_t>(p.layout.totalSlots, 1)), 0);
  std::vector<std::int64_t> digit(p.slots.size(), 0);
  std::uint64_t rest = lo;
  for (std::size_t k = 0; k < p.slots.size(); ++k) {
    digit[k] = static_cast<std::int64_t>(rest % static_cast<std::uint64_t>(p.radix[k]));
    rest /= static_cast<std::uint64_t>(p.radix[k]);
    state[p.slots[k]] = digit[k];
  }
  Machine m(p.nodes, p.vars);
  m.state = state.data();
  std::uint64_t hits = 0;
  for (std::uint64_t i = lo; i < hi; ++i) {
    if (firstOnly && (i & 1023) == 0 && found.load(std::memory_order_relaxed)) break;
    bool ok = true;
    for (int r : p.roots) {
      if (!m.eval(r)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      ++hits;
      if (firstOnly) {
        found.store(true);
        if (witness) *witness = state;
        break;
      }
    }
    for (std::size_t k = 0; k < digit.size(); ++k) {
      if (++digit[k] < p.radix[k]) {
        state[p.slots[k]] = digit[k];
        break;
      }
      digit[k] = 0;
      state[p.slots[k]] = 0;
    }
  }
  return hits;
}

std::uint64_t run(const Plan& p, const OracleOptions& opts, bool firstOnly,
                  std::vector<std::int64_t>* witness) {
  std::atomic<bool> found{false};
  const std::uint64_t n = p.enumerated;
  const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(std::min<std::uint64_t>(n, 64))));
  if (workers == 1 || witness) return scan(p, 0, n, firstOnly, found, witness);
  std::vector<std::uint64_t> hits(workers, 0);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t lo = n * w / workers;
    const std::uint64_t hi = n * (w + 1) / workers;
    pool.emplace_back([&, w, lo, hi] { hits[w] = scan(p, lo, hi, firstOnly, found, nullptr); });
  }
  for (auto& t : pool) t.join();
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return total;
}

Plan plan(const Scope& s, const std::vector<Expr>& exprs, const OracleOptions& opts) {
  Plan p(s, exprs, opts);
  if (p.capExceeded)
    throw OracleError(OracleError::Kind::CapExceeded, "state space exceeds the enumeration cap");
  if (!p.supported)
    throw OracleError(OracleError::Kind::Unsupported, "program is outside the finite fragment");
  return p;
}

}  // namespace

std::int64_t evaluate(const Expr& e, const Scope& scope, const Assignment& a) {
  Layout layout(scope);
  Compiler c(scope, layout);
  int root = c.compile(e);
  if (!c.supported || !layout.finite)
    throw OracleError(OracleError::Kind::Unsupported, "expression is outside the finite fragment");
  std::vector<std::int64_t> state(static_cast<std::size_t>(std::max<std::int64_t>(layout.totalSlots, 1)), 0);
  for (std::size_t d = 0; d < a.tables.size() && d < layout.offset.size(); ++d) {
    if (layout.offset[d] < 0) continue;
    for (std::size_t k = 0; k < a.tables[d].size(); ++k)
      state[static_cast<std::size_t>(layout.offset[d]) + k] = a.tables[d][k];
  }
  Machine m(c.nodes, c.varCount);
  m.state = state.data();
  return m.eval(root);
}

std::uint64_t stateSpace(const Scope& scope, const std::vector<Expr>& exprs,
                         const OracleOptions& opts) {
  Plan p(scope, exprs, opts);
  return p.supported ? p.total : 0;
}

bool supportsProgram(const Scope& scope, const std::vector<Expr>& exprs, const OracleOptions& opts) {
  return Plan(scope, exprs, opts).supported;
}

SatStatus oracleCheck(const Scope& scope, const std::vector<Expr>& exprs, const OracleOptions& opts) {
  Plan p = plan(scope, exprs, opts);
  return run(p, opts, true, nullptr) > 0 ? SatStatus::Sat : SatStatus::Unsat;
}

std::uint64_t countModels(const Scope& scope, const std::vector<Expr>& exprs,
                          const OracleOptions& opts) {
  Plan p = plan(scope, exprs, opts);
  return run(p, opts, false, nullptr) * p.multiplier;
}

bool findModel(const Scope& scope, const std::vector<Expr>& exprs, Assignment& out,
               const OracleOptions& opts) {
  Plan p = plan(scope, exprs, opts);
  std::vector<std::int64_t> state;
  if (run(p, opts, true, &state) == 0) return false;
  out.tables.assign(scope.decls().size(), {});
  for (std::size_t d = 0; d < scope.decls().size(); ++d) {
    if (p.layout.offset[d] < 0) continue;
    auto begin = state.begin() + p.layout.offset[d];
    out.tables[d].assign(begin, begin + p.layout.count[d]);
  }
  return true;
}

CheckResult OracleChecker::check(const Query& q, int) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  r.status = oracleCheck(*q.scope, q.assertions, opts_);
  r.elapsedMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace ssv
