// SPDX-License-Identifier: Apache-2.0
//
// ssv: run / eval / verify / oracle front end.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ssv/harness.hpp"
#include "ssv/oracle.hpp"
#include "ssv/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssv;

namespace {

constexpr const char* kFooter = R"(Subcommands:
  run     --task <file>                  solve one task, print the result JSON
  eval    --dataset <jsonl> --out <dir>  evaluate a dataset; writes report.json, report.csv,
          [--ablate <grid.json>]         timings.json and ablation.json
          [--limit N]                    only the first N tasks
  verify  --program <file>               check instantiations against a program
          --instantiations <file>        JSON array or the block format of the generator
          [--well-formed]                also report well-formedness flags
  oracle  --program <file>               answer by enumeration
          [--count]                      print the number of models of the preconditions
          [--cap N]                      largest state space to enumerate

Provider modes: replay (default, needs --transcripts), record (needs --transcripts; uses --script
when given, HTTP otherwise), live (HTTP, key from SSV_API_KEY), scripted (needs --script).
Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.)";

struct Globals {
  std::string config;
  unsigned parallelism = 0;
  std::string logLevel = "warn";
  std::string solverCmd;
  int checkTimeoutMs = 0;
  std::string provider;
  std::string transcripts;
  std::string script;
  std::string model;
  std::string endpoint;
  std::string solverCache;
  std::string promptDir;
  int maxRepairs = -1;
  int maxErrorRefines = -1;
  std::vector<double> temperatures;
  std::string repairPolicy;
  std::uint64_t groundingBound = 0;
  bool parallelTemperatures = false;
};

SsvConfig buildConfig(const Globals& g, const CLI::App& app) {
  SsvConfig cfg = g.config.empty() ? SsvConfig{} : SsvConfig::fromFile(g.config);
  auto given = [&](const char* name) { return app.count(name) > 0; };
  if (given("--parallelism")) cfg.parallelism = g.parallelism;
  else if (g.config.empty()) cfg.parallelism = std::max(1u, std::thread::hardware_concurrency());
  if (given("--solver-cmd")) cfg.solverCmd = g.solverCmd;
  if (given("--check-timeout-ms")) cfg.checkTimeoutMs = g.checkTimeoutMs;
  if (given("--provider")) cfg.provider.mode = g.provider;
  if (given("--transcripts")) cfg.provider.transcripts = g.transcripts;
  if (given("--script")) cfg.provider.script = g.script;
  if (given("--model")) cfg.model = g.model;
  if (given("--endpoint")) cfg.provider.endpoint = g.endpoint;
  if (given("--solver-cache")) cfg.solverCache = g.solverCache;
  if (given("--prompt-dir")) cfg.promptDir = g.promptDir;
  if (given("--max-repairs")) cfg.maxRepairs = g.maxRepairs;
  if (given("--max-error-refines")) cfg.maxErrorRefines = g.maxErrorRefines;
  if (given("--temperatures")) cfg.temperatures = g.temperatures;
  if (given("--grounding-bound")) cfg.groundingBound = g.groundingBound;
  if (given("--parallel-temperatures")) cfg.parallelTemperatures = g.parallelTemperatures;
  if (given("--repair-policy")) {
    if (g.repairPolicy == "on_verification_failure") cfg.repairPolicy = RepairPolicy::OnVerificationFailure;
    else if (g.repairPolicy == "on_missing_answer") cfg.repairPolicy = RepairPolicy::OnMissingAnswer;
    else throw ConfigError("unknown repair policy '" + g.repairPolicy + "'");
  }
  cfg.checkWorkers = std::min(cfg.checkWorkers, cfg.parallelism);
  cfg.validate();
  return cfg;
}

std::unique_ptr<SmtBackend> makeSolver(const SsvConfig& cfg) {
  auto smt = std::make_unique<SmtBackend>(SmtOptions{cfg.solverCmd, cfg.groundingBound});
  if (!cfg.solverCache.empty()) smt->loadCache(cfg.solverCache);
  return smt;
}

void saveSolverCache(const SsvConfig& cfg, const SmtBackend& smt) {
  if (!cfg.solverCache.empty()) smt.saveCache(cfg.solverCache);
}

ReasoningTask loadTask(const std::string& path) {
  const std::string text = readFile(path);
  auto lines = splitLines(text);
  std::erase_if(lines, [](const std::string& l) { return trim(l).empty(); });
  // A .jsonl with one line and a pretty-printed object both work.
  return taskFromJson(lines.size() == 1 ? lines[0] : text);
}

json instantiationsJson(const std::vector<Instantiation>& insts, const VerificationOutcome& v) {
  json arr = json::array();
  for (const auto& c : v.checks) {
    const auto& in = insts[c.position];
    json e = {{"constraint", in.constraintIndex},
              {"polarity", polarityName(in.polarity)},
              {"description", in.description ? json(*in.description) : json(nullptr)},
              {"code", in.code},
              {"status", c.skipped ? "skipped" : statusName(c.status)},
              {"failure", c.failure ? json(failReasonName(*c.failure)) : json(nullptr)}};
    if (in.illFormed) e["error"] = in.error;
    arr.push_back(std::move(e));
  }
  return arr;
}

int cmdRun(const SsvConfig& cfg, const std::string& taskPath) {
  const auto task = loadTask(taskPath);
  auto llm = makeGateway(cfg);
  auto smt = makeSolver(cfg);
  const PromptSet prompts = loadPrompts(cfg);
  Pipeline pipeline(cfg, *llm, *smt, prompts);
  const auto result = pipeline.run(task);
  saveSolverCache(cfg, *smt);
  std::cout << resultToJson(result) << "\n";
  return 0;
}

int cmdEval(const SsvConfig& cfg, const std::string& dataset, const std::string& outDir,
            const std::string& ablate, std::size_t limit) {
  auto tasks = loadDataset(dataset);
  if (limit > 0 && tasks.size() > limit) tasks.resize(limit);
  std::optional<AblationGrid> grid;
  if (!ablate.empty()) grid = AblationGrid::fromJson(readFile(ablate), cfg);
  auto llm = makeGateway(cfg);
  auto smt = makeSolver(cfg);
  const PromptSet prompts = loadPrompts(cfg);

  const auto ev = evaluate(tasks, cfg, *llm, *smt, prompts);
  fs::create_directories(outDir);
  const fs::path out(outDir);
  writeReport(ev.records, ev.metrics, (out / "report.json").string(), ReportFormat::Json);
  writeReport(ev.records, ev.metrics, (out / "report.csv").string(), ReportFormat::Csv);
  writeFile((out / "timings.json").string(), timingsToJson(ev.records));
  if (grid) {
    const auto cells = ablationGrid(tasks, cfg, *grid, *llm, *smt, prompts);
    writeFile((out / "ablation.json").string(), ablationToJson(cells));
  }
  saveSolverCache(cfg, *smt);
  std::cout << metricsToJson(ev.metrics) << "\n";
  for (const auto& r : ev.records)
    if (!r.error.empty()) return 1;
  return 0;
}

int cmdVerify(const SsvConfig& cfg, const std::string& programPath, const std::string& instPath, bool wellFormed) {
  const auto program = parseProgram(readFile(programPath));
  const std::string text = readFile(instPath);
  const auto first = text.find_first_not_of(" \t\r\n");
  const auto insts = first != std::string::npos && text[first] == '['
                         ? instantiationsFromJson(program, text)
                         : parseInstantiations(text, program);
  auto smt = makeSolver(cfg);
  const auto v = verifyInstantiations(*smt, program, insts, cfg.checkTimeoutMs, cfg.checkWorkers);
  json j = {{"pass", v.pass},
            {"reason", v.reason ? json(failReasonName(*v.reason)) : json(nullptr)},
            {"failing", nullptr},
            {"checks", instantiationsJson(insts, v)}};
  if (v.failing)
    j["failing"] = {{"constraint", v.failing->constraintIndex}, {"polarity", polarityName(v.failing->polarity)},
                    {"code", v.failing->code}};
  if (wellFormed) {
    const auto outcome = executeProgram(*smt, program, cfg.checkTimeoutMs);
    const auto wf = isWellFormed(*smt, program, outcome, cfg.checkTimeoutMs);
    json flags = json::array();
    for (const auto& d : wf.degenerate) flags.push_back({{"constraint", d.index}, {"flag", degeneracyName(d.flag)}});
    json passing = json::array();
    for (const auto& l : outcome.passing) passing.push_back(l.str());
    j["wellFormed"] = {{"ok", wf.ok()},
                       {"structureOk", wf.structureOk},
                       {"structureError", wf.structureError},
                       {"singleAnswerOk", wf.singleAnswerOk},
                       {"passing", passing},
                       {"degenerate", flags}};
  }
  saveSolverCache(cfg, *smt);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmdOracle(const std::string& programPath, bool count, std::uint64_t cap) {
  const auto program = parseProgram(readFile(programPath));
  const auto pre = program.fullPreconditions();
  OracleOptions opts;
  if (cap) opts.cap = cap;
  if (count) {
    std::cout << countModels(*program.scope, pre, opts) << "\n";
    return 0;
  }
  OracleChecker oracle(opts);
  const auto outcome = executeProgram(oracle, program);
  json passing = json::array();
  for (const auto& l : outcome.passing) passing.push_back(l.str());
  std::cout << json{{"answer", outcome.answer ? json(outcome.answer->str()) : json(nullptr)},
                    {"passing", passing},
                    {"states", stateSpace(*program.scope, pre, opts)}}
                   .dump(2)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic self-verification for multiple-choice logical reasoning"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "JSON config with the SsvConfig shape")->check(CLI::ExistingFile);
  app.add_option("--parallelism", g.parallelism, "worker cap for tasks and checks (default: logical cores)")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.logLevel, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
  app.add_option("--solver-cmd", g.solverCmd, "SMT-LIB 2 solver reading a script on stdin (default: z3 -in)");
  app.add_option("--check-timeout-ms", g.checkTimeoutMs, "budget per solver check")->check(CLI::PositiveNumber);
  app.add_option("--provider", g.provider, "replay, record, live or scripted")
      ->check(CLI::IsMember({"replay", "record", "live", "scripted"}));
  app.add_option("--transcripts", g.transcripts, "transcript store for replay and record");
  app.add_option("--script", g.script, "scripted response rules (JSON)");
  app.add_option("--model", g.model, "model name sent to the provider");
  app.add_option("--endpoint", g.endpoint, "OpenAI compatible base URL");
  app.add_option("--solver-cache", g.solverCache, "JSON file persisting solver results");
  app.add_option("--prompt-dir", g.promptDir, "directory overriding the built-in prompt templates");
  app.add_option("--max-repairs", g.maxRepairs, "repair invocations per temperature")->check(CLI::NonNegativeNumber);
  app.add_option("--max-error-refines", g.maxErrorRefines, "error refinement rounds per program")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--temperatures", g.temperatures, "sampling temperatures in order")->delimiter(',');
  app.add_option("--repair-policy", g.repairPolicy, "on_verification_failure or on_missing_answer");
  app.add_option("--grounding-bound", g.groundingBound, "largest quantifier expansion")->check(CLI::PositiveNumber);
  app.add_flag("--parallel-temperatures", g.parallelTemperatures, "run temperature branches concurrently");

  std::string taskPath, dataset, outDir, ablate, programPath, instPath;
  std::size_t limit = 0;
  bool wellFormed = false, count = false;
  std::uint64_t cap = 0;

  auto* run = app.add_subcommand("run", "solve one task");
  run->add_option("--task", taskPath, "task JSON")->required()->check(CLI::ExistingFile);
  auto* eval = app.add_subcommand("eval", "evaluate a dataset");
  eval->add_option("--dataset", dataset, "tasks JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", outDir, "report directory")->required();
  eval->add_option("--ablate", ablate, "ablation grid JSON")->check(CLI::ExistingFile);
  eval->add_option("--limit", limit, "only the first N tasks");
  auto* verify = app.add_subcommand("verify", "check instantiations against a program");
  verify->add_option("--program", programPath, "program file")->required()->check(CLI::ExistingFile);
  verify->add_option("--instantiations", instPath, "instantiations file")->required()->check(CLI::ExistingFile);
  verify->add_flag("--well-formed", wellFormed, "also run the well-formedness checks");
  auto* oracle = app.add_subcommand("oracle", "answer a program by enumeration");
  oracle->add_option("--program", programPath, "program file")->required()->check(CLI::ExistingFile);
  oracle->add_flag("--count", count, "print the model count of the preconditions");
  oracle->add_option("--cap", cap, "largest state space to enumerate");
  for (auto* sub : {run, eval, verify, oracle}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("ssv"));
  spdlog::set_level(spdlog::level::from_str(g.logLevel));

  try {
    if (*oracle) return cmdOracle(programPath, count, cap);
    const SsvConfig cfg = buildConfig(g, app);
    if (*run) return cmdRun(cfg, taskPath);
    if (*eval) return cmdEval(cfg, dataset, outDir, ablate, limit);
    if (*verify) return cmdVerify(cfg, programPath, instPath, wellFormed);
  } catch (const ConfigError& e) {
    std::cerr << "ssv: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DatasetError& e) {
    std::cerr << "ssv: dataset error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "ssv: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ssv: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
