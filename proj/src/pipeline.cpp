// SPDX-License-Identifier: Apache-2.0
#include "ssv/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <future>
#include <json.hpp>

#include <spdlog/spdlog.h>

#include "ssv/util.hpp"

namespace ssv {

using nlohmann::json;

const char* repairPolicyName(RepairPolicy p) {
  return p == RepairPolicy::OnVerificationFailure ? "on_verification_failure" : "on_missing_answer";
}

// ---- config --------------------------------------------------------------------

void SsvConfig::validate() const {
  if (temperatures.empty()) throw ConfigError("temperatures must not be empty");
  for (double t : temperatures)
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("temperature " + std::to_string(t) + " is outside [0, 1]");
  if (maxRepairs < 0) throw ConfigError("maxRepairs must be >= 0");
  if (maxErrorRefines < 0) throw ConfigError("maxErrorRefines must be >= 0");
  if (maxConstraints < 1) throw ConfigError("maxConstraints must be >= 1");
  if (checkTimeoutMs < 1) throw ConfigError("checkTimeoutMs must be >= 1");
  if (maxTokens < 1) throw ConfigError("maxTokens must be >= 1");
  if (checkWorkers < 1) throw ConfigError("checkWorkers must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  static const char* modes[] = {"replay", "record", "live", "scripted"};
  if (std::find(std::begin(modes), std::end(modes), provider.mode) == std::end(modes))
    throw ConfigError("provider must be one of replay, record, live, scripted; got '" + provider.mode + "'");
}

int SsvConfig::callsPerTemperature() const {
  const int direct = 1 + maxErrorRefines;
  const int compositional = 3 + maxConstraints + maxErrorRefines;  // decompose, init, options
  return direct + compositional + 1 + maxRepairs * 2;
}

int SsvConfig::callBudget() const {
  return static_cast<int>(temperatures.size()) * callsPerTemperature() + 1;
}

namespace {

template <typename T>
void take(json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
  j.erase(it);
}

void rejectRest(const json& j, const std::string& where) {
  if (j.empty()) return;
  throw ConfigError("unknown " + where + "key '" + j.begin().key() + "'");
}

}  // namespace

SsvConfig SsvConfig::fromJson(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  SsvConfig c;
  take(j, "temperatures", c.temperatures);
  take(j, "maxRepairs", c.maxRepairs);
  take(j, "maxErrorRefines", c.maxErrorRefines);
  take(j, "maxConstraints", c.maxConstraints);
  take(j, "checkTimeoutMs", c.checkTimeoutMs);
  take(j, "groundingBound", c.groundingBound);
  take(j, "model", c.model);
  take(j, "maxTokens", c.maxTokens);
  take(j, "parallelTemperatures", c.parallelTemperatures);
  take(j, "checkWorkers", c.checkWorkers);
  take(j, "parallelism", c.parallelism);
  take(j, "solverCmd", c.solverCmd);
  take(j, "solverCache", c.solverCache);
  take(j, "promptDir", c.promptDir);
  std::string policy;
  take(j, "repairPolicy", policy);
  take(j, "repair_policy", policy);
  if (policy == "on_verification_failure")
    c.repairPolicy = RepairPolicy::OnVerificationFailure;
  else if (policy == "on_missing_answer")
    c.repairPolicy = RepairPolicy::OnMissingAnswer;
  else if (!policy.empty())
    throw ConfigError("repairPolicy must be on_verification_failure or on_missing_answer");
  if (auto it = j.find("provider"); it != j.end()) {
    json p = *it;
    j.erase(it);
    if (p.is_string()) {
      c.provider.mode = p.get<std::string>();
    } else if (p.is_object()) {
      take(p, "mode", c.provider.mode);
      take(p, "transcripts", c.provider.transcripts);
      take(p, "script", c.provider.script);
      take(p, "endpoint", c.provider.endpoint);
      take(p, "timeoutSec", c.provider.timeoutSec);
      take(p, "maxInFlight", c.provider.maxInFlight);
      take(p, "requestsPerMinute", c.provider.requestsPerMinute);
      rejectRest(p, "provider ");
    } else {
      throw ConfigError("provider must be a string or an object");
    }
  }
  rejectRest(j, "config ");
  c.validate();
  return c;
}

SsvConfig SsvConfig::fromFile(const std::string& path) {
  std::string text;
  try {
    text = readFile(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  SsvConfig c = fromJson(text);
  // Paths inside a config file are relative to the file.
  const auto base = std::filesystem::path(path).parent_path();
  for (std::string* p : {&c.provider.transcripts, &c.provider.script, &c.solverCache, &c.promptDir})
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  return c;
}

std::string SsvConfig::toJson() const {
  json j = {
      {"temperatures", temperatures},
      {"maxRepairs", maxRepairs},
      {"maxErrorRefines", maxErrorRefines},
      {"maxConstraints", maxConstraints},
      {"checkTimeoutMs", checkTimeoutMs},
      {"groundingBound", groundingBound},
      {"model", model},
      {"maxTokens", maxTokens},
      {"repairPolicy", repairPolicyName(repairPolicy)},
      {"parallelTemperatures", parallelTemperatures},
      {"checkWorkers", checkWorkers},
      {"parallelism", parallelism},
      {"solverCmd", solverCmd},
      {"solverCache", solverCache},
      {"promptDir", promptDir},
      {"provider",
       {{"mode", provider.mode},
        {"transcripts", provider.transcripts},
        {"script", provider.script},
        {"endpoint", provider.endpoint},
        {"timeoutSec", provider.timeoutSec},
        {"maxInFlight", provider.maxInFlight},
        {"requestsPerMinute", provider.requestsPerMinute}}},
  };
  return j.dump(2);
}

void CallBudget::spend(PromptKind k) {
  if (used_ >= limit_)
    throw LlmError(LlmError::Kind::BudgetExceeded, std::string("LLM call budget of ") + std::to_string(limit_) +
                                                       " exhausted before " + promptKindName(k));
  ++used_;
}

std::shared_ptr<LlmGateway> makeGateway(const SsvConfig& cfg) {
  const auto& pc = cfg.provider;
  auto scripted = [&]() -> std::shared_ptr<LlmProvider> {
    if (pc.script.empty()) throw ConfigError("provider 'scripted' needs a script file");
    return std::make_shared<ScriptedProvider>(ScriptedProvider::fromFile(pc.script));
  };
  auto http = [&]() -> std::shared_ptr<LlmProvider> {
    HttpOptions o;
    o.endpoint = pc.endpoint;
    o.timeoutSec = pc.timeoutSec;
    o.maxInFlight = pc.maxInFlight;
    o.requestsPerMinute = pc.requestsPerMinute;
    try {
      return std::make_shared<HttpProvider>(o);
    } catch (const LlmError& e) {
      throw ConfigError(e.what());
    }
  };
  if (pc.mode == "replay") {
    if (pc.transcripts.empty()) throw ConfigError("replay needs a transcripts file");
    if (!std::filesystem::exists(pc.transcripts))
      throw ConfigError("transcripts file '" + pc.transcripts + "' does not exist");
    return std::make_shared<LlmGateway>(TranscriptMode::Replay, TranscriptStore::load(pc.transcripts));
  }
  if (pc.mode == "record") {
    if (pc.transcripts.empty()) throw ConfigError("record needs a transcripts file");
    return std::make_shared<LlmGateway>(TranscriptMode::Record, TranscriptStore::load(pc.transcripts),
                                        pc.script.empty() ? http() : scripted(), pc.transcripts);
  }
  if (pc.mode == "scripted")
    return std::make_shared<LlmGateway>(TranscriptMode::Live, std::make_shared<TranscriptStore>(), scripted());
  if (pc.mode == "live")
    return std::make_shared<LlmGateway>(TranscriptMode::Live, std::make_shared<TranscriptStore>(), http());
  throw ConfigError("unknown provider '" + pc.mode + "'");
}

PromptSet loadPrompts(const SsvConfig& cfg) {
  return cfg.promptDir.empty() ? PromptSet::builtin() : PromptSet::fromDirectory(cfg.promptDir);
}

// ---- results ---------------------------------------------------------------------

namespace {

json labelJson(const std::optional<OptionLabel>& l) { return l ? json(l->str()) : json(nullptr); }

json verificationJson(const VerificationOutcome& v, bool parsed) {
  json j = {{"pass", parsed && v.pass}, {"checked", 0}, {"skipped", 0}};
  int checked = 0, skipped = 0;
  for (const auto& c : v.checks) (c.skipped ? skipped : checked)++;
  j["checked"] = checked;
  j["skipped"] = skipped;
  if (v.reason) j["reason"] = failReasonName(*v.reason);
  if (v.failing) {
    j["failing"] = {{"constraint", v.failing->constraintIndex},
                    {"polarity", polarityName(v.failing->polarity)},
                    {"code", v.failing->code}};
    if (v.failing->description) j["failing"]["description"] = *v.failing->description;
    if (v.failing->illFormed) j["failing"]["error"] = v.failing->error;
  }
  return j;
}

json wellFormedJson(const WellFormedReport& w) {
  json flags = json::array();
  for (const auto& d : w.degenerate) flags.push_back({{"constraint", d.index}, {"flag", degeneracyName(d.flag)}});
  json j = {{"structureOk", w.structureOk}, {"singleAnswerOk", w.singleAnswerOk}, {"degenerate", flags}};
  if (!w.structureError.empty()) j["structureError"] = w.structureError;
  return j;
}

std::string tempText(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

}  // namespace

std::string resultToJson(const SsvResult& r, int indent) {
  json attempts = json::array();
  for (const auto& a : r.trace.attempts) {
    json passing = json::array();
    for (auto l : a.passing) passing.push_back(l.str());
    attempts.push_back({{"temperature", a.temperature},
                        {"repair", a.repairIndex},
                        {"program", a.programDigest.substr(0, 16)},
                        {"answer", labelJson(a.answer)},
                        {"passing", passing},
                        {"instantiations", a.instantiationCount},
                        {"instantiationsParsed", a.instantiationsParsed},
                        {"verification", verificationJson(a.verification, a.instantiationsParsed)},
                        {"wellFormed", wellFormedJson(a.wellFormed)},
                        {"verified", a.verified}});
  }
  json j = {
      {"answer", labelJson(r.answer)},
      {"verified", r.verified},
      {"trace",
       {{"temperatureUsed", r.trace.temperatureUsed ? json(*r.trace.temperatureUsed) : json(nullptr)},
        {"repairsUsed", r.trace.repairsUsed},
        {"usedFallback", r.trace.usedFallback},
        {"programProduced", r.trace.programProduced},
        {"llmCalls", r.trace.llmCalls},
        {"attempts", attempts},
        {"events", r.trace.events}}},
      {"program", r.program.empty() ? json(nullptr) : json(r.program)},
  };
  return j.dump(indent);
}

std::string formatOptions(const ReasoningTask& task) {
  std::string out;
  for (const auto& o : task.options) {
    if (!out.empty()) out += '\n';
    out += "(" + o.label.str() + ") " + o.text;
  }
  return out;
}

// ---- pipeline --------------------------------------------------------------------

Pipeline::Pipeline(SsvConfig cfg, LlmGateway& llm, SatChecker& checker, const PromptSet& prompts)
    : cfg_(std::move(cfg)), llm_(llm), checker_(checker), prompts_(prompts) {
  cfg_.validate();
}

std::string Pipeline::ask(PromptKind kind, const PromptInputs& inputs, double temperature, CallBudget& budget) {
  budget.spend(kind);
  LlmRequest req;
  req.kind = kind;
  req.prompt = renderPrompt(kind, inputs, prompts_);
  req.model = cfg_.model;
  req.temperature = temperature;
  req.maxTokens = cfg_.maxTokens;
  return llm_.complete(req);
}

namespace {

void note(std::vector<std::string>* events, double t, std::string what) {
  spdlog::debug("[T={}] {}", tempText(t), what);
  if (events) events->push_back("T=" + tempText(t) + ": " + std::move(what));
}

/// Parse and make sure every option query compiles.
SegmentedProgram parseExecutable(const std::string& text, std::uint64_t bound) {
  SegmentedProgram p = parseProgram(text);
  const auto pre = p.fullPreconditions();
  for (const auto& o : p.options) {
    Query q{p.scope.get(), pre};
    q.assertions.push_back(o.checkExpr);
    compileScript(q, bound);
  }
  return p;
}

/// Drop segment marker lines an LLM may echo back in a code fragment.
std::string codeOnly(const std::string& text) {
  std::string out;
  for (const auto& line : splitLines(stripFences(text))) {
    const std::string t = trim(line);
    if (t.rfind("#INIT", 0) == 0 || t.rfind("#CONSTRAINT", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return trim(out);
}

}  // namespace

std::optional<SegmentedProgram> Pipeline::parseWithRefinement(std::string text, double temperature,
                                                              CallBudget& budget,
                                                              std::vector<std::string>* events) {
  for (int round = 0;; ++round) {
    try {
      return parseExecutable(text, cfg_.groundingBound);
    } catch (const DslError& e) {
      note(events, temperature, std::string("program error: ") + e.what());
      if (round >= cfg_.maxErrorRefines) return std::nullopt;
      const std::string resp = ask(PromptKind::ErrorRefine, {{"program", text}, {"error", e.what()}},
                                   temperature, budget);
      try {
        text = parseRefinedProgram(resp);
      } catch (const FormatError& fe) {
        note(events, temperature, std::string("refinement unusable: ") + fe.what());
        return std::nullopt;
      }
    }
  }
}

std::optional<SegmentedProgram> Pipeline::genProgram(const ReasoningTask& task, double temperature,
                                                     CallBudget& budget, std::vector<std::string>* events) {
  const PromptInputs base = {{"problem", task.context}, {"question", task.question}, {"options", formatOptions(task)}};
  const std::string direct = stripFences(ask(PromptKind::DirectProgram, base, temperature, budget));
  if (auto p = parseWithRefinement(direct, temperature, budget, events)) {
    note(events, temperature, "direct program accepted");
    return p;
  }

  note(events, temperature, "trying compositional generation");
  Decomposition d;
  try {
    d = parseDecomposition(ask(PromptKind::Decompose, {{"problem", task.context}}, temperature, budget));
  } catch (const FormatError& e) {
    note(events, temperature, std::string("decomposition unusable: ") + e.what());
    return std::nullopt;
  }
  if (static_cast<int>(d.constraints.size()) > cfg_.maxConstraints) {
    note(events, temperature, "decomposition has " + std::to_string(d.constraints.size()) + " constraints, over the limit");
    return std::nullopt;
  }
  const std::string ctx = d.initialContext.value_or("");
  std::string program = ctx.empty() ? "#INIT\n" : "#INIT: " + ctx + "\n";
  const std::string initCode =
      codeOnly(ask(PromptKind::IncrementalConstraint,
                   {{"program", trim(program)}, {"constraint", ctx.empty() ? task.context : ctx}}, temperature, budget));
  if (!initCode.empty()) program += initCode + "\n";
  for (const auto& c : d.constraints) {
    const std::string code =
        codeOnly(ask(PromptKind::IncrementalConstraint, {{"program", trim(program)}, {"constraint", c}}, temperature, budget));
    program += "\n#CONSTRAINT: " + c + "\n" + code + "\n";
  }
  PromptInputs opts = base;
  opts["program"] = trim(program);
  program += "\n" + stripFences(ask(PromptKind::OptionsCode, opts, temperature, budget)) + "\n";
  auto p = parseWithRefinement(program, temperature, budget, events);
  note(events, temperature, p ? "compositional program accepted" : "compositional generation failed");
  return p;
}

std::vector<Instantiation> Pipeline::genInstantiations(const SegmentedProgram& program, double temperature,
                                                       CallBudget& budget, std::vector<std::string>* events) {
  if (program.constraints.empty()) return {};
  std::string constraints;
  for (const auto& c : program.constraints) {
    if (!constraints.empty()) constraints += "\n###\n";
    constraints += c.nlText;
  }
  const std::string scenario = program.init.nlContext.empty() ? "None" : program.init.nlContext;
  const std::string resp = ask(PromptKind::Instantiations,
                               {{"scenario", scenario}, {"init_code", trim(printInitCode(program))}, {"constraints", constraints}},
                               temperature, budget);
  try {
    return parseInstantiations(resp, program);
  } catch (const FormatError& e) {
    note(events, temperature, std::string("instantiations unusable: ") + e.what());
    return {};
  }
}

namespace {

std::string failureExpectation(const Instantiation& inst, FailReason reason) {
  switch (reason) {
    case FailReason::PosUnsat:
      return "The example should be satisfiable together with the constraint code, but it is not.";
    case FailReason::NegSat:
      return "The example should be unsatisfiable together with the constraint code, but it is satisfiable.";
    case FailReason::IllFormedExample: return "The example code could not be checked: " + inst.error + ".";
    case FailReason::Timeout:
      return "Checking the example together with the constraint code did not finish in time.";
  }
  return {};
}

std::string flagExpectation(Degeneracy d) {
  switch (d) {
    case Degeneracy::Tautology:
      return "The constraint code holds in every situation the initial code allows, so it restricts nothing.";
    case Degeneracy::Contradiction:
      return "The constraint code cannot hold together with the initial code.";
    case Degeneracy::VacuousImplication:
      return "The condition of an implication in the constraint code can never hold, so the implication restricts nothing.";
    case Degeneracy::Undetermined:
      return "Checking the constraint code for degenerate cases did not finish in time.";
  }
  return {};
}

}  // namespace

std::optional<SegmentedProgram> Pipeline::repairProgram(const ReasoningTask& task, const SegmentedProgram& program,
                                                        const std::optional<Instantiation>& failing,
                                                        const WellFormedReport& report, const AnswerOutcome& outcome,
                                                        double temperature, CallBudget& budget,
                                                        std::vector<std::string>* events) {
  (void)task;
  if (program.constraints.empty()) return std::nullopt;
  std::size_t idx = program.constraints.size() - 1;
  std::string expectation;
  std::string header = "PositiveExampleCode";
  std::string example = "NONE";
  if (failing) {
    idx = failing->constraintIndex;
    expectation = failureExpectation(*failing, failing->illFormed ? FailReason::IllFormedExample
                                               : failing->polarity == Polarity::Positive ? FailReason::PosUnsat
                                                                                         : FailReason::NegSat);
    header = failing->polarity == Polarity::Positive ? "PositiveExampleCode" : "NegativeExampleCode";
    example = failing->code;
  } else if (!report.degenerate.empty()) {
    idx = report.degenerate.front().index;
    expectation = flagExpectation(report.degenerate.front().flag);
  } else if (report.structureOk && !report.singleAnswerOk) {
    std::string labels;
    for (auto l : outcome.passing) labels += (labels.empty() ? "" : ", ") + l.str();
    expectation = "Exactly one answer option should follow from the program, but " +
                  std::to_string(outcome.passing.size()) + " do" + (labels.empty() ? "" : ": " + labels) +
                  ". A constraint may be missing, too weak or too strong.";
  } else {
    return std::nullopt;
  }

  const std::string resp =
      ask(PromptKind::SemanticRepair,
          {{"expectation", expectation},
           {"scenario", program.init.nlContext.empty() ? "None" : program.init.nlContext},
           {"init_code", trim(printInitCode(program))},
           {"constraint", program.constraints[idx].nlText},
           {"constraint_code", trim(printConstraintCode(program, idx))},
           {"example_header", header},
           {"example_code", example}},
          temperature, budget);
  RepairPatch patch;
  try {
    patch = parseRepairPatch(resp);
  } catch (const FormatError& e) {
    note(events, temperature, std::string("repair unusable: ") + e.what());
    return std::nullopt;
  }
  if (!patch.usable()) {
    note(events, temperature, "repair left every segment unchanged");
    return std::nullopt;
  }

  std::string text;
  if (patch.initCode) {
    const std::string& ctx = program.init.nlContext;
    text = (ctx.empty() ? "#INIT\n" : "#INIT: " + ctx + "\n") + codeOnly(*patch.initCode) + "\n";
  } else {
    text = printInit(program);
  }
  for (std::size_t i = 0; i < program.constraints.size(); ++i) {
    text += "\n";
    if (i == idx && patch.constraintCode)
      text += "#CONSTRAINT: " + program.constraints[i].nlText + "\n" + codeOnly(*patch.constraintCode) + "\n";
    else
      text += printConstraint(program, i);
  }
  text += "\n" + printOptions(program);
  try {
    auto p = parseExecutable(text, cfg_.groundingBound);
    std::vector<std::string> parts;
    if (patch.initCode) parts.push_back("init");
    if (patch.constraintCode) parts.push_back("constraint " + std::to_string(idx));
    if (patch.exampleCode) parts.push_back("example");
    std::string what;
    for (const auto& s : parts) what += (what.empty() ? "" : ", ") + s;
    note(events, temperature, "repaired " + what);
    return p;
  } catch (const DslError& e) {
    note(events, temperature, std::string("repaired program does not parse: ") + e.what());
    return std::nullopt;
  }
}

std::optional<OptionLabel> Pipeline::inferFallbackAnswer(const ReasoningTask& task, CallBudget& budget) {
  const std::string resp =
      ask(PromptKind::CotFallback,
          {{"problem", task.context}, {"question", task.question}, {"options", formatOptions(task)}},
          cfg_.temperatures.front(), budget);
  auto l = extractCotAnswer(resp);
  if (l && !task.hasLabel(*l)) return std::nullopt;
  return l;
}

struct Pipeline::Branch {
  double temperature = 0;
  bool anyProgram = false;
  std::vector<AttemptLog> attempts;
  std::vector<std::string> events;
  int calls = 0;
  std::optional<std::size_t> firstAnswer;  // attempt index
  std::optional<std::size_t> verifiedAt;
  std::vector<std::string> programs;  // source per attempt
  std::exception_ptr error;
};

Pipeline::Branch Pipeline::runTemperature(const ReasoningTask& task, double T) {
  Branch b;
  b.temperature = T;
  CallBudget budget(cfg_.callsPerTemperature());
  try {
    std::optional<SegmentedProgram> p = genProgram(task, T, budget, &b.events);
    for (int repair = 0; p; ++repair) {
      b.anyProgram = true;
      AttemptLog a;
      a.temperature = T;
      a.repairIndex = repair;
      const std::string source = printProgram(*p);
      a.programDigest = sha256Hex(source);
      const AnswerOutcome outcome = executeProgram(checker_, *p, cfg_.checkTimeoutMs);
      a.answer = outcome.answer;
      a.passing.assign(outcome.passing.begin(), outcome.passing.end());
      if (a.answer && !b.firstAnswer) b.firstAnswer = b.attempts.size();

      const auto insts = genInstantiations(*p, T, budget, &b.events);
      a.instantiationCount = insts.size();
      a.instantiationsParsed = !insts.empty();
      a.verification = verifyInstantiations(checker_, *p, insts, cfg_.checkTimeoutMs, cfg_.checkWorkers);
      std::vector<OptionLabel> labels;
      for (const auto& o : task.options) labels.push_back(o.label);
      a.wellFormed = isWellFormed(checker_, *p, outcome, cfg_.checkTimeoutMs, &labels);
      a.verified = a.answer && a.instantiationsParsed && a.verification.pass && a.wellFormed.ok();
      b.attempts.push_back(a);
      b.programs.push_back(source);
      if (a.verified) {
        b.verifiedAt = b.attempts.size() - 1;
        break;
      }
      if (cfg_.repairPolicy == RepairPolicy::OnMissingAnswer && a.answer) break;
      if (repair >= cfg_.maxRepairs) break;
      if (a.verification.reason == FailReason::Timeout) {
        note(&b.events, T, "verification timed out; no repair");
        break;
      }
      const std::optional<Instantiation> failing = a.verification.pass ? std::nullopt : a.verification.failing;
      if (!failing && a.wellFormed.ok()) {
        note(&b.events, T, "nothing to guide a repair");
        break;
      }
      auto next = repairProgram(task, *p, failing, a.wellFormed, outcome, T, budget, &b.events);
      if (next && equal(*next, *p)) {
        note(&b.events, T, "repair made no change");
        break;
      }
      p = std::move(next);
    }
  } catch (...) {
    b.error = std::current_exception();
  }
  b.calls = budget.used();
  return b;
}

SsvResult Pipeline::run(const ReasoningTask& task) {
  SsvResult r;
  std::optional<OptionLabel> best;
  std::string bestProgram;
  std::optional<double> bestT;
  int bestRepairs = 0;

  std::vector<std::future<Branch>> pending;
  if (cfg_.parallelTemperatures && cfg_.temperatures.size() > 1) {
    for (double T : cfg_.temperatures)
      pending.push_back(std::async(std::launch::async, [this, &task, T] { return runTemperature(task, T); }));
  }
  // Selection always walks temperatures in configured order, so the outcome does not
  // depend on whether branches ran concurrently.
  for (std::size_t i = 0; i < cfg_.temperatures.size(); ++i) {
    Branch b = pending.empty() ? runTemperature(task, cfg_.temperatures[i]) : pending[i].get();
    r.trace.llmCalls += b.calls;
    r.trace.attempts.insert(r.trace.attempts.end(), b.attempts.begin(), b.attempts.end());
    r.trace.events.insert(r.trace.events.end(), b.events.begin(), b.events.end());
    if (b.error) {
      for (std::size_t k = i + 1; k < pending.size(); ++k) pending[k].wait();
      std::rethrow_exception(b.error);
    }
    r.trace.programProduced = r.trace.programProduced || b.anyProgram;
    if (!best && b.firstAnswer) {
      const auto& a = b.attempts[*b.firstAnswer];
      best = a.answer;
      bestProgram = b.programs[*b.firstAnswer];
      bestT = b.temperature;
      bestRepairs = a.repairIndex;
    }
    if (b.verifiedAt) {
      const auto& a = b.attempts[*b.verifiedAt];
      r.answer = a.answer;
      r.verified = true;
      r.program = b.programs[*b.verifiedAt];
      r.trace.temperatureUsed = b.temperature;
      r.trace.repairsUsed = a.repairIndex;
      for (std::size_t k = i + 1; k < pending.size(); ++k) pending[k].wait();
      return r;
    }
  }

  if (!r.trace.programProduced) {
    CallBudget budget(1);
    r.answer = inferFallbackAnswer(task, budget);
    r.trace.llmCalls += budget.used();
    r.trace.usedFallback = true;
    r.trace.events.push_back("no program at any temperature; used the direct answer");
    return r;
  }
  r.answer = best;
  r.program = bestProgram;
  r.trace.temperatureUsed = bestT;
  r.trace.repairsUsed = bestRepairs;
  return r;
}

}  // namespace ssv
