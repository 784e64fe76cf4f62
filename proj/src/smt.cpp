// SPDX-License-Identifier: Apache-2.0
#include "ssv/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <json.hpp>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ssv/util.hpp"

extern char** environ;

namespace ssv {

const char* statusName(SatStatus s) {
  switch (s) {
    case SatStatus::Sat: return "sat";
    case SatStatus::Unsat: return "unsat";
    case SatStatus::Unknown: return "unknown";
  }
  return "unknown";
}

namespace {

std::vector<Expr> domainValues(const Scope& s, SortId sort) {
  std::vector<Expr> out;
  if (sort == kBool) {
    out.push_back(mkBool(false));
    out.push_back(mkBool(true));
    return out;
  }
  const SortDecl& d = s.sort(sort);
  for (std::size_t i = 0; i < d.members.size(); ++i) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::Member;
    n->sort = sort;
    n->name = d.members[i];
    n->value = static_cast<std::int64_t>(i);
    out.push_back(n);
  }
  return out;
}

void instances(const Expr& body, const std::vector<Binder>& bs, std::size_t k,
               const std::vector<std::vector<Expr>>& values, std::vector<Expr>& out) {
  if (k == bs.size()) {
    out.push_back(body);
    return;
  }
  for (const auto& v : values[k]) instances(substitute(body, bs[k].name, v), bs, k + 1, values, out);
}

}  // namespace

Expr groundQuantifiers(const Expr& e, const Scope& scope, std::uint64_t bound) {
  if (e->op == Op::ForAll || e->op == Op::Exists) {
    long double size = 1;
    bool finite = true;
    for (const auto& b : e->binders) {
      if (!scope.isFinite(b.sort)) {
        finite = false;
        break;
      }
      size *= static_cast<long double>(scope.domainSize(b.sort));
    }
    if (finite && size <= static_cast<long double>(bound)) {
      std::vector<std::vector<Expr>> values;
      for (const auto& b : e->binders) values.push_back(domainValues(scope, b.sort));
      std::vector<Expr> bodies;
      instances(e->args[0], e->binders, 0, values, bodies);
      for (auto& b : bodies) b = groundQuantifiers(b, scope, bound);
      return mk(e->op == Op::ForAll ? Op::And : Op::Or, kBool, std::move(bodies));
    }
  }
  if (e->args.empty()) return e;
  std::vector<Expr> args;
  bool changed = false;
  for (const auto& a : e->args) {
    args.push_back(groundQuantifiers(a, scope, bound));
    changed = changed || args.back() != a;
  }
  if (!changed) return e;
  auto n = std::make_shared<ExprNode>(*e);
  n->args = std::move(args);
  return n;
}

namespace {

std::string quote(const char* prefix, const std::string& name) {
  return std::string("|") + prefix + name + "|";
}

class Emitter {
 public:
  explicit Emitter(const Scope& s) : s_(s) {}

  std::string sort(SortId id) const {
    SortId c = s_.canonical(id);
    if (c == kBool) return "Bool";
    if (c == kInt) return "Int";
    return quote("s.", s_.sortName(c));
  }

  void expr(const Expr& e, std::ostream& out) {
    switch (e->op) {
      case Op::BoolLit: out << (e->value ? "true" : "false"); return;
      case Op::IntLit:
        if (e->value < 0)
          out << "(- " << -e->value << ")";
        else
          out << e->value;
        return;
      case Op::Member: out << quote("m.", e->name); return;
      case Op::Const: out << quote("u.", e->name); return;
      case Op::Var: {
        for (auto it = env_.rbegin(); it != env_.rend(); ++it) {
          if (it->first == e->name) {
            out << it->second;
            return;
          }
        }
        throw SolverError("unbound variable '" + e->name + "' in query");
      }
      case Op::Apply:
        out << "(" << quote("u.", e->name);
        for (const auto& a : e->args) {
          out << " ";
          expr(a, out);
        }
        out << ")";
        return;
      case Op::Neq:
        out << "(not (= ";
        expr(e->args[0], out);
        out << " ";
        expr(e->args[1], out);
        out << "))";
        return;
      case Op::And:
      case Op::Or:
        if (e->args.empty()) {
          out << (e->op == Op::And ? "true" : "false");
          return;
        }
        if (e->args.size() == 1) {
          expr(e->args[0], out);
          return;
        }
        break;
      case Op::Sum:
        if (e->args.empty()) {
          out << "0";
          return;
        }
        if (e->args.size() == 1) {
          expr(e->args[0], out);
          return;
        }
        break;
      case Op::Distinct:
        if (e->args.size() < 2) {
          out << "true";
          return;
        }
        break;
      case Op::ForAll:
      case Op::Exists: {
        const std::size_t mark = env_.size();
        out << (e->op == Op::ForAll ? "(forall (" : "(exists (");
        for (std::size_t i = 0; i < e->binders.size(); ++i) {
          const Binder& b = e->binders[i];
          std::string v = "|b" + std::to_string(env_.size()) + "|";
          out << (i ? " " : "") << "(" << v << " " << sort(b.sort) << ")";
          env_.emplace_back(b.name, v);
        }
        out << ") ";
        expr(e->args[0], out);
        out << ")";
        env_.resize(mark);
        return;
      }
      case Op::Comprehension:
      case Op::Name:
      case Op::Call:
        throw SolverError(std::string("cannot compile ") + opName(e->op) + " node");
      default: break;
    }
    out << "(" << head(e->op);
    for (const auto& a : e->args) {
      out << " ";
      expr(a, out);
    }
    out << ")";
  }

 private:
  static const char* head(Op op) {
    switch (op) {
      case Op::Eq: return "=";
      case Op::Lt: return "<";
      case Op::Le: return "<=";
      case Op::Gt: return ">";
      case Op::Ge: return ">=";
      case Op::Add:
      case Op::Sum: return "+";
      case Op::Sub:
      case Op::Neg: return "-";
      case Op::Mul: return "*";
      case Op::And: return "and";
      case Op::Or: return "or";
      case Op::Not: return "not";
      case Op::Implies: return "=>";
      case Op::Xor: return "xor";
      case Op::Ite: return "ite";
      case Op::Distinct: return "distinct";
      default: return "?";
    }
  }

  const Scope& s_;
  std::vector<std::pair<std::string, std::string>> env_;
};

}  // namespace

std::string compileScript(const Query& q, std::uint64_t groundingBound) {
  if (!q.scope) throw SolverError("query without scope");
  const Scope& s = *q.scope;
  Emitter em(s);
  std::ostringstream out;
  out << "(set-logic ALL)\n";
  for (std::size_t i = 2; i < s.sorts().size(); ++i) {
    const SortDecl& d = s.sorts()[i];
    if (d.kind == SortDecl::Kind::Enum) {
      out << "(declare-datatype " << quote("s.", d.name) << " (";
      for (std::size_t m = 0; m < d.members.size(); ++m)
        out << (m ? " " : "") << "(" << quote("m.", d.members[m]) << ")";
      out << "))\n";
    } else if (d.kind == SortDecl::Kind::Uninterpreted) {
      out << "(declare-sort " << quote("s.", d.name) << " 0)\n";
    }
  }
  for (const auto& d : s.decls()) {
    if (d.kind == Decl::Kind::Collection) continue;
    out << "(declare-fun " << quote("u.", d.name) << " (";
    for (std::size_t i = 0; i < d.argSorts.size(); ++i) out << (i ? " " : "") << em.sort(d.argSorts[i]);
    out << ") " << em.sort(d.result) << ")\n";
  }
  for (const auto& a : q.assertions) {
    Expr e = groundQuantifiers(expandComprehensions(a, s), s, groundingBound);
    out << "(assert ";
    em.expr(e, out);
    out << ")\n";
  }
  out << "(check-sat)\n";
  return out.str();
}

std::string canonicalKey(const Query& q, std::uint64_t groundingBound) {
  return sha256Hex(compileScript(q, groundingBound));
}

// ---- solver process ----------------------------------------------------------

namespace {

std::vector<std::string> splitCommand(const std::string& cmd) {
  std::vector<std::string> out;
  std::istringstream in(cmd);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

SatStatus parseStatus(const std::string& output) {
  std::istringstream in(output);
  std::string tok;
  in >> tok;
  if (tok == "sat") return SatStatus::Sat;
  if (tok == "unsat") return SatStatus::Unsat;
  if (tok == "unknown" || tok == "timeout") return SatStatus::Unknown;
  throw SolverError("unexpected solver output: " + output.substr(0, 400));
}

}  // namespace

SmtBackend::SmtBackend(SmtOptions opts) : opts_(std::move(opts)) {
  // Writes to a solver that died early must not kill the process.
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

SatStatus SmtBackend::runSolver(const std::string& script, int budgetMs) const {
  const auto argvStr = splitCommand(opts_.solverCmd);
  if (argvStr.empty()) throw SolverError("empty solver command");
  std::vector<char*> argv;
  for (const auto& a : argvStr) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  int in[2], out[2];
  if (::pipe2(in, O_CLOEXEC) != 0) throw SolverError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(out, O_CLOEXEC) != 0) {
    ::close(in[0]);
    ::close(in[1]);
    throw SolverError(std::string("pipe: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_adddup2(&fa, in[0], 0);
  posix_spawn_file_actions_adddup2(&fa, out[1], 1);
  posix_spawn_file_actions_adddup2(&fa, out[1], 2);
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, argv[0], &fa, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  ::close(in[0]);
  ::close(out[1]);
  if (rc != 0) {
    ::close(in[1]);
    ::close(out[0]);
    throw SolverError("cannot start solver '" + opts_.solverCmd + "': " + std::strerror(rc));
  }
  runs_.fetch_add(1);

  ::fcntl(in[1], F_SETFL, O_NONBLOCK);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(std::max(budgetMs, 1));
  std::size_t written = 0;
  std::string output;
  bool timedOut = false;
  int wfd = in[1];
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                          deadline - std::chrono::steady_clock::now())
                          .count();
    if (left <= 0) {
      timedOut = true;
      break;
    }
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {out[0], POLLIN, 0};
    if (wfd >= 0) fds[n++] = {wfd, POLLOUT, 0};
    const int pr = ::poll(fds, n, static_cast<int>(left));
    if (pr < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (pr == 0) continue;
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w = ::write(wfd, script.data() + written, script.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN) written = script.size();
      if (written >= script.size()) {
        ::close(wfd);
        wfd = -1;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[4096];
      const ssize_t r = ::read(out[0], buf, sizeof buf);
      if (r > 0) {
        output.append(buf, static_cast<std::size_t>(r));
        // one check-sat, one answer line
        if (output.find('\n') != std::string::npos) break;
      } else if (r == 0) {
        break;
      }
    }
  }
  if (wfd >= 0) ::close(wfd);
  ::close(out[0]);
  ::kill(pid, SIGKILL);
  int status = 0;
  ::waitpid(pid, &status, 0);
  if (timedOut) return SatStatus::Unknown;
  if (output.empty()) throw SolverError("solver exited without output");
  return parseStatus(output);
}

CheckResult SmtBackend::check(const Query& q, int budgetMs) {
  const auto start = std::chrono::steady_clock::now();
  const std::string script = compileScript(q, opts_.groundingBound);
  const std::string key = sha256Hex(script);
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  std::promise<SatStatus> promise;
  std::shared_future<SatStatus> fut;
  bool owner = false;
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      fut = it->second;
    } else {
      fut = promise.get_future().share();
      cache_.emplace(key, fut);
      owner = true;
    }
  }
  if (!owner) {
    SatStatus st = fut.get();
    if (st != SatStatus::Unknown) {
      hits_.fetch_add(1);
      return {st, elapsed(), true};
    }
    // the owner timed out; try ourselves with our own budget
    return {runSolver(script, budgetMs), elapsed(), false};
  }
  SatStatus st;
  try {
    st = runSolver(script, budgetMs);
  } catch (...) {
    {
      std::lock_guard lock(mu_);
      cache_.erase(key);
    }
    promise.set_exception(std::current_exception());
    throw;
  }
  if (st == SatStatus::Unknown) {
    std::lock_guard lock(mu_);
    cache_.erase(key);
  }
  promise.set_value(st);
  spdlog::trace("solver {} -> {}", key.substr(0, 12), statusName(st));
  return {st, elapsed(), false};
}

void SmtBackend::loadCache(const std::string& path) {
  std::string text;
  try {
    text = readFile(path);
  } catch (const IoError&) {
    return;
  }
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (!j.is_object()) throw SolverError("solver cache " + path + " is not a JSON object");
  std::lock_guard lock(mu_);
  for (auto& [k, v] : j.items()) {
    if (!v.is_string()) continue;
    SatStatus st;
    if (v == "sat")
      st = SatStatus::Sat;
    else if (v == "unsat")
      st = SatStatus::Unsat;
    else
      continue;
    std::promise<SatStatus> p;
    p.set_value(st);
    cache_[k] = p.get_future().share();
  }
}

void SmtBackend::saveCache(const std::string& path) const {
  nlohmann::json j = nlohmann::json::object();
  {
    std::lock_guard lock(mu_);
    for (const auto& [k, f] : cache_) {
      if (f.wait_for(std::chrono::seconds(0)) != std::future_status::ready) continue;
      try {
        SatStatus st = f.get();
        if (st != SatStatus::Unknown) j[k] = statusName(st);
      } catch (...) {
      }
    }
  }
  writeFile(path, j.dump(1) + "\n");
}

void SmtBackend::clearCache() {
  std::lock_guard lock(mu_);
  cache_.clear();
}

std::size_t SmtBackend::cacheSize() const {
  std::lock_guard lock(mu_);
  return cache_.size();
}

// ---- predicates -------------------------------------------------------------

CheckResult checkSat(SatChecker& checker, const Scope& scope, const std::vector<Expr>& preconditions,
                     const std::vector<Expr>& extra, int budgetMs) {
  Query q{&scope, preconditions};
  q.assertions.insert(q.assertions.end(), extra.begin(), extra.end());
  return checker.check(q, budgetMs);
}

bool isSat(SatChecker& c, const Scope& s, const std::vector<Expr>& pre, const Expr& prop, int budgetMs) {
  return checkSat(c, s, pre, {prop}, budgetMs).status == SatStatus::Sat;
}

bool isUnsat(SatChecker& c, const Scope& s, const std::vector<Expr>& pre, const Expr& prop, int budgetMs) {
  return checkSat(c, s, pre, {prop}, budgetMs).status == SatStatus::Unsat;
}

bool isValid(SatChecker& c, const Scope& s, const std::vector<Expr>& pre, const Expr& prop, int budgetMs) {
  if (checkSat(c, s, pre, {}, budgetMs).status != SatStatus::Sat) return false;
  return checkSat(c, s, pre, {mkNot(prop)}, budgetMs).status == SatStatus::Unsat;
}

bool AnswerOutcome::anyUnknown() const {
  for (const auto& [_, o] : perOption) {
    if (o.status == SatStatus::Unknown) return true;
    if (o.baseStatus && *o.baseStatus == SatStatus::Unknown) return true;
  }
  return false;
}

AnswerOutcome executeProgram(SatChecker& checker, const SegmentedProgram& p, int budgetMs) {
  const Scope& s = *p.scope;
  const std::vector<Expr> pre = p.fullPreconditions();
  AnswerOutcome out;
  std::optional<SatStatus> base;
  for (const auto& o : p.options) {
    OptionOutcome r;
    r.checkType = o.checkType;
    switch (o.checkType) {
      case CheckType::Sat:
        r.status = checkSat(checker, s, pre, {o.checkExpr}, budgetMs).status;
        r.passed = r.status == SatStatus::Sat;
        break;
      case CheckType::Unsat:
        r.status = checkSat(checker, s, pre, {o.checkExpr}, budgetMs).status;
        r.passed = r.status == SatStatus::Unsat;
        break;
      case CheckType::Valid:
        if (!base) base = checkSat(checker, s, pre, {}, budgetMs).status;
        r.baseStatus = base;
        r.status = checkSat(checker, s, pre, {mkNot(o.checkExpr)}, budgetMs).status;
        r.passed = *base == SatStatus::Sat && r.status == SatStatus::Unsat;
        break;
    }
    if (r.passed) out.passing.insert(o.label);
    out.perOption[o.label] = r;
  }
  if (out.passing.size() == 1) out.answer = *out.passing.begin();
  return out;
}

}  // namespace ssv
