// SPDX-License-Identifier: Apache-2.0
//
// Seeded generator of enum-only programs for oracle/solver comparisons.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ssv::testing {

struct RandomProgramLimits {
  int maxSorts = 3;
  int maxMembers = 6;
  int maxFunctions = 3;
  int maxConstraints = 8;
  int maxDepth = 3;
  std::uint64_t maxStates = 1u << 16;  // keeps enumeration cheap
};

class RandomProgramGen {
 public:
  explicit RandomProgramGen(std::uint64_t seed, RandomProgramLimits lim = {}) : rng_(seed), lim_(lim) {}

  /// Source text of a fresh program with 2..4 options.
  std::string next() {
    sorts_.clear();
    fns_.clear();
    const int nSorts = pick(1, lim_.maxSorts);
    for (int s = 0; s < nSorts; ++s) sorts_.push_back(pick(2, lim_.maxMembers));
    do {
      fns_.clear();
      const int nFns = pick(1, lim_.maxFunctions);
      for (int f = 0; f < nFns; ++f) {
        Fn fn;
        const int arity = pick(0, 2);
        for (int a = 0; a < arity; ++a) fn.args.push_back(pick(0, nSorts - 1));
        fn.result = pick(-1, nSorts - 1);
        fns_.push_back(fn);
      }
    } while (states() > lim_.maxStates);

    std::string out = "#INIT: random\n";
    for (int s = 0; s < nSorts; ++s) {
      out += "enum S" + std::to_string(s) + " {";
      for (int m = 0; m < sorts_[s]; ++m) out += (m ? ", " : " ") + member(s, m);
      out += " }\nlist L" + std::to_string(s) + " = [";
      for (int m = 0; m < sorts_[s]; ++m) out += (m ? ", " : "") + member(s, m);
      out += "]\n";
    }
    for (std::size_t f = 0; f < fns_.size(); ++f) {
      out += "fn f" + std::to_string(f) + "(";
      for (std::size_t a = 0; a < fns_[f].args.size(); ++a)
        out += (a ? ", S" : "S") + std::to_string(fns_[f].args[a]);
      out += ") -> " + sortName(fns_[f].result) + "\n";
    }
    if (coin(0.3)) out += "assert " + boolExpr(1) + "\n";

    const int nCons = pick(1, lim_.maxConstraints);
    for (int c = 0; c < nCons; ++c) out += "\n#CONSTRAINT: c" + std::to_string(c) + "\nassert " + boolExpr(0) + "\n";

    static const char* types[] = {"sat", "unsat", "valid"};
    out += "\n#CHECK TYPE: " + std::string(types[pick(0, 2)]) + "\n";
    const int nOpts = pick(2, 4);
    for (int o = 0; o < nOpts; ++o) out += "#OPTION " + std::string(1, char('A' + o)) + ": o\ncheck " + boolExpr(1) + "\n";
    return out;
  }

 private:
  struct Fn {
    std::vector<int> args;
    int result = -1;  // -1 is Bool
  };
  struct Var {
    std::string name;
    int sort;
  };

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  static std::string member(int s, int m) { return "m" + std::to_string(s) + "_" + std::to_string(m); }
  static std::string sortName(int s) { return s < 0 ? "Bool" : "S" + std::to_string(s); }

  std::uint64_t states() const {
    double total = 1;
    for (const auto& f : fns_) {
      double entries = 1;
      for (int a : f.args) entries *= sorts_[a];
      const double dom = f.result < 0 ? 2 : sorts_[f.result];
      for (int i = 0; i < static_cast<int>(entries); ++i) total *= dom;
      if (total > 1e12) return ~std::uint64_t{0};
    }
    return static_cast<std::uint64_t>(total);
  }

  std::string call(const Fn& fn, int idx, int depth) {
    std::string s = "f" + std::to_string(idx);
    if (fn.args.empty()) return s;
    s += "(";
    for (std::size_t a = 0; a < fn.args.size(); ++a) s += (a ? ", " : "") + term(fn.args[a], depth + 1);
    return s + ")";
  }

  std::string term(int sort, int depth) {
    std::vector<int> producers;
    for (std::size_t f = 0; f < fns_.size(); ++f)
      if (fns_[f].result == sort) producers.push_back(static_cast<int>(f));
    std::vector<const Var*> vars;
    for (const auto& v : env_)
      if (v.sort == sort) vars.push_back(&v);
    const int r = pick(0, 9);
    if (!producers.empty() && depth < lim_.maxDepth && r < 4) {
      const int f = producers[pick(0, static_cast<int>(producers.size()) - 1)];
      return call(fns_[f], f, depth);
    }
    if (!vars.empty() && r < 7) return vars[pick(0, static_cast<int>(vars.size()) - 1)]->name;
    return member(sort, pick(0, sorts_[sort] - 1));
  }

  std::string atom(int depth) {
    const int f = pick(0, static_cast<int>(fns_.size()) - 1);
    const auto& fn = fns_[f];
    if (fn.result < 0) return call(fn, f, depth);
    return call(fn, f, depth) + (coin(0.7) ? " == " : " != ") + term(fn.result, depth + 1);
  }

  std::string boolExpr(int depth) {
    if (depth >= lim_.maxDepth) return atom(depth);
    switch (pick(0, 9)) {
      case 0: return "Not(" + boolExpr(depth + 1) + ")";
      case 1: return "And(" + boolExpr(depth + 1) + ", " + boolExpr(depth + 1) + ")";
      case 2: return "Or(" + boolExpr(depth + 1) + ", " + boolExpr(depth + 1) + ")";
      case 3: return "Implies(" + boolExpr(depth + 1) + ", " + boolExpr(depth + 1) + ")";
      case 4:
      case 5: {
        const int s = pick(0, static_cast<int>(sorts_.size()) - 1);
        const std::string v = "x" + std::to_string(env_.size());
        env_.push_back({v, s});
        const std::string body = boolExpr(depth + 1);
        env_.pop_back();
        return std::string(coin(0.5) ? "ForAll" : "Exists") + "([" + v + ": S" + std::to_string(s) + "], " + body + ")";
      }
      case 6: {
        const int s = pick(0, static_cast<int>(sorts_.size()) - 1);
        const std::string v = "y" + std::to_string(env_.size());
        env_.push_back({v, s});
        const std::string body = boolExpr(depth + 1);
        env_.pop_back();
        static const char* cmp[] = {" == ", " <= ", " >= ", " < ", " > "};
        return "Sum([" + body + " for " + v + " in L" + std::to_string(s) + "])" + cmp[pick(0, 4)] +
               std::to_string(pick(0, sorts_[s]));
      }
      case 7: {
        const int s = pick(0, static_cast<int>(sorts_.size()) - 1);
        return "Distinct(" + term(s, depth + 1) + ", " + term(s, depth + 1) + ")";
      }
      default: return atom(depth);
    }
  }

  std::mt19937_64 rng_;
  RandomProgramLimits lim_;
  std::vector<int> sorts_;
  std::vector<Fn> fns_;
  std::vector<Var> env_;
};

}  // namespace ssv::testing
