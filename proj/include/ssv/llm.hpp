// SPDX-License-Identifier: Apache-2.0
//
// LLM access: prompt templates, providers, the transcript store and response parsers.
#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ssv/verifier.hpp"

namespace ssv {

enum class PromptKind {
  Decompose,
  DirectProgram,
  IncrementalConstraint,
  OptionsCode,
  ErrorRefine,
  Instantiations,
  SemanticRepair,
  CotFallback,
};
inline constexpr PromptKind kAllPromptKinds[] = {
    PromptKind::Decompose,      PromptKind::DirectProgram, PromptKind::IncrementalConstraint,
    PromptKind::OptionsCode,    PromptKind::ErrorRefine,   PromptKind::Instantiations,
    PromptKind::SemanticRepair, PromptKind::CotFallback,
};

const char* promptKindName(PromptKind k);
std::optional<PromptKind> promptKindFromString(std::string_view s);

// ---- templates ---------------------------------------------------------------

using PromptInputs = std::map<std::string, std::string>;

/// One template text per kind. Slots are written {{name}}.
class PromptSet {
 public:
  /// The templates compiled into the library.
  static const PromptSet& builtin();
  /// Load <dir>/<file>.txt for every kind; missing files fall back to the builtin text.
  static PromptSet fromDirectory(const std::filesystem::path& dir);

  const std::string& text(PromptKind k) const;
  /// Slot names in order of first appearance.
  std::vector<std::string> slots(PromptKind k) const;

 private:
  std::map<PromptKind, std::string> texts_;
};

/// File stem of a kind's template, e.g. "semantic_repair".
const char* promptFileName(PromptKind k);

/// Throws LlmError(MissingSlot) when an input is missing.
std::string renderPrompt(PromptKind kind, const PromptInputs& inputs,
                         const PromptSet& set = PromptSet::builtin());

// ---- requests and providers ----------------------------------------------------

struct LlmRequest {
  PromptKind kind = PromptKind::DirectProgram;
  std::string prompt;
  std::string model;
  double temperature = 0;
  int maxTokens = 2048;
};

/// Digest of (kind, model, temperature, prompt). maxTokens is deliberately left out.
std::string transcriptKey(const LlmRequest& req);

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string complete(const LlmRequest& req) = 0;
};

/// Canned responses chosen by rules. Each rule may restrict kind, temperature and
/// substrings of the prompt; the first matching rule answers.
class ScriptedProvider : public LlmProvider {
 public:
  struct Rule {
    std::optional<PromptKind> kind;
    std::optional<double> temperature;
    std::vector<std::string> contains;
    std::string response;
  };

  ScriptedProvider() = default;
  explicit ScriptedProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {}

  /// JSON array of {"kind", "temperature", "contains", "response" | "response_file"}.
  /// response_file is relative to the script's directory.
  static ScriptedProvider fromFile(const std::filesystem::path& path);
  static ScriptedProvider fromJson(const std::string& json, const std::filesystem::path& baseDir = {});

  void add(Rule r) { rules_.push_back(std::move(r)); }
  std::size_t size() const { return rules_.size(); }

  std::string complete(const LlmRequest& req) override;

 private:
  std::vector<Rule> rules_;
};

struct HttpOptions {
  std::string endpoint = "https://api.openai.com/v1";
  std::string apiKey;  // defaults to $SSV_API_KEY
  int timeoutSec = 120;
  int retries = 3;
  unsigned maxInFlight = 4;
  unsigned requestsPerMinute = 60;  // 0 disables the limit
};

/// OpenAI-compatible chat completions endpoint.
class HttpProvider : public LlmProvider {
 public:
  explicit HttpProvider(HttpOptions opts);
  std::string complete(const LlmRequest& req) override;

 private:
  void acquire();
  void release();

  HttpOptions opts_;
  std::mutex mu_;
  std::condition_variable cv_;
  unsigned inFlight_ = 0;
  std::deque<std::chrono::steady_clock::time_point> recent_;
};

// ---- transcripts -------------------------------------------------------------

struct TranscriptEntry {
  std::string kind;
  std::string model;
  double temperature = 0;
  std::string response;

  bool operator==(const TranscriptEntry&) const = default;
};

/// key -> entry; JSON file {"<hex>": {"kind", "model", "temperature", "response"}}. Thread-safe.
class TranscriptStore {
 public:
  TranscriptStore() = default;

  static std::shared_ptr<TranscriptStore> load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::optional<TranscriptEntry> get(const std::string& key) const;
  void put(const std::string& key, TranscriptEntry e);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, TranscriptEntry> entries_;
};

enum class TranscriptMode { Replay, Record, Live };
const char* transcriptModeName(TranscriptMode m);

/// Front door for every LLM call. Replay never touches the provider.
class LlmGateway {
 public:
  LlmGateway(TranscriptMode mode, std::shared_ptr<TranscriptStore> store,
             std::shared_ptr<LlmProvider> provider = nullptr,
             std::optional<std::filesystem::path> recordPath = std::nullopt);

  std::string complete(const LlmRequest& req);

  TranscriptMode mode() const { return mode_; }
  std::uint64_t calls() const { return calls_.load(); }
  TranscriptStore& store() { return *store_; }

 private:
  TranscriptMode mode_;
  std::shared_ptr<TranscriptStore> store_;
  std::shared_ptr<LlmProvider> provider_;
  std::optional<std::filesystem::path> recordPath_;
  std::mutex recordMu_;
  std::atomic<std::uint64_t> calls_{0};
};

// ---- response parsers ----------------------------------------------------------

/// Drop markdown fence lines and surrounding whitespace.
std::string stripFences(const std::string& text);

struct Decomposition {
  std::optional<std::string> initialContext;  // nullopt for "None"
  std::vector<std::string> constraints;
};
Decomposition parseDecomposition(const std::string& response);

struct InstantiationBlock {
  std::string constraint;
  std::string positiveDescription, positiveCode;
  std::string negativeDescription, negativeCode;
};
/// Blocks in response order, without reference to any program.
std::vector<InstantiationBlock> parseInstantiationBlocks(const std::string& response);

/// Two instantiations per constraint, positive first. Blocks are matched to constraints
/// by position; a count mismatch is a FormatError.
std::vector<Instantiation> parseInstantiations(const std::string& response,
                                               const SegmentedProgram& program);

/// Everything after the CorrectedProgram label.
std::string parseRefinedProgram(const std::string& response);

struct RepairPatch {
  std::string discussion;
  std::optional<std::string> initCode;
  std::optional<std::string> constraintCode;
  std::optional<std::string> exampleCode;

  bool usable() const { return initCode || constraintCode || exampleCode; }
};
RepairPatch parseRepairPatch(const std::string& response);

/// Letter from the last "Answer: (X)" line, if any.
std::optional<OptionLabel> extractCotAnswer(const std::string& response);

}  // namespace ssv
