// SPDX-License-Identifier: Apache-2.0
//
// The verify-and-repair loop over temperatures, program generation and the fallback.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssv/llm.hpp"

namespace ssv {

enum class RepairPolicy { OnVerificationFailure, OnMissingAnswer };
const char* repairPolicyName(RepairPolicy p);

struct ProviderConfig {
  std::string mode = "replay";  // replay | record | live | scripted
  std::string transcripts;
  std::string script;
  std::string endpoint = "https://api.openai.com/v1";
  int timeoutSec = 120;
  unsigned maxInFlight = 4;
  unsigned requestsPerMinute = 60;
};

struct SsvConfig {
  std::vector<double> temperatures{0.0, 0.3, 0.4, 0.5};
  int maxRepairs = 2;
  int maxErrorRefines = 2;
  /// Decompositions with more constraints are rejected by the compositional path.
  int maxConstraints = 24;
  int checkTimeoutMs = kDefaultBudgetMs;
  std::uint64_t groundingBound = kDefaultGroundingBound;
  std::string model = "gpt-4";
  int maxTokens = 2048;
  RepairPolicy repairPolicy = RepairPolicy::OnVerificationFailure;
  bool parallelTemperatures = false;
  unsigned checkWorkers = 1;
  unsigned parallelism = 1;  // tasks in flight during evaluation
  std::string solverCmd = "z3 -in";
  std::string solverCache;
  std::string promptDir;
  ProviderConfig provider;

  /// Throws ConfigError.
  void validate() const;
  /// LLM calls one temperature may spend.
  int callsPerTemperature() const;
  /// Hard cap on LLM calls for one task.
  int callBudget() const;

  /// Unknown keys are rejected. Missing keys keep their defaults.
  static SsvConfig fromJson(const std::string& text);
  static SsvConfig fromFile(const std::string& path);
  std::string toJson() const;
};

/// Gateway for `cfg.provider`: replay (transcripts must exist), record (scripted when a script is
/// set, HTTP otherwise), live or scripted. Throws ConfigError.
std::shared_ptr<LlmGateway> makeGateway(const SsvConfig& cfg);
/// Built-in templates unless promptDir is set.
PromptSet loadPrompts(const SsvConfig& cfg);

/// LLM calls against a fixed allowance; exceeding it throws LlmError(BudgetExceeded).
class CallBudget {
 public:
  explicit CallBudget(int limit) : limit_(limit) {}
  void spend(PromptKind k);
  int used() const { return used_; }
  int limit() const { return limit_; }

 private:
  int limit_;
  int used_ = 0;
};

struct AttemptLog {
  double temperature = 0;
  int repairIndex = 0;  // 0 for the generated program
  std::string programDigest;
  std::optional<OptionLabel> answer;
  std::vector<OptionLabel> passing;
  std::size_t instantiationCount = 0;
  bool instantiationsParsed = false;
  VerificationOutcome verification;
  WellFormedReport wellFormed;
  bool verified = false;
};

struct SsvTrace {
  std::optional<double> temperatureUsed;
  int repairsUsed = 0;
  bool usedFallback = false;
  bool programProduced = false;
  int llmCalls = 0;
  std::vector<AttemptLog> attempts;
  std::vector<std::string> events;
};

struct SsvResult {
  std::optional<OptionLabel> answer;
  bool verified = false;
  SsvTrace trace;
  std::string program;  // source of the program the answer came from
};

std::string resultToJson(const SsvResult& r, int indent = 2);

/// "(A) text" lines for prompts.
std::string formatOptions(const ReasoningTask& task);

class Pipeline {
 public:
  Pipeline(SsvConfig cfg, LlmGateway& llm, SatChecker& checker,
           const PromptSet& prompts = PromptSet::builtin());

  const SsvConfig& config() const { return cfg_; }

  /// Direct generation with error refinement, then the compositional path.
  std::optional<SegmentedProgram> genProgram(const ReasoningTask& task, double temperature,
                                             CallBudget& budget, std::vector<std::string>* events = nullptr);
  /// Two per constraint; empty when the response could not be parsed.
  std::vector<Instantiation> genInstantiations(const SegmentedProgram& program, double temperature,
                                               CallBudget& budget, std::vector<std::string>* events = nullptr);
  /// Patched and re-parsed program, or none when the patch is unusable.
  std::optional<SegmentedProgram> repairProgram(const ReasoningTask& task, const SegmentedProgram& program,
                                                const std::optional<Instantiation>& failing,
                                                const WellFormedReport& report, const AnswerOutcome& outcome,
                                                double temperature, CallBudget& budget,
                                                std::vector<std::string>* events = nullptr);
  std::optional<OptionLabel> inferFallbackAnswer(const ReasoningTask& task, CallBudget& budget);

  SsvResult run(const ReasoningTask& task);

 private:
  struct Branch;
  Branch runTemperature(const ReasoningTask& task, double temperature);
  std::string ask(PromptKind kind, const PromptInputs& inputs, double temperature, CallBudget& budget);
  std::optional<SegmentedProgram> parseWithRefinement(std::string text, double temperature,
                                                      CallBudget& budget, std::vector<std::string>* events);

  SsvConfig cfg_;
  LlmGateway& llm_;
  SatChecker& checker_;
  PromptSet prompts_;
};

}  // namespace ssv
