// SPDX-License-Identifier: Apache-2.0
#include "ssv/llm.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <regex>

#include <spdlog/spdlog.h>

#include "ssv/util.hpp"

namespace ssv {

namespace {

struct BuiltinPrompt {
  const char* file;
  const char* text;
};

// generated from prompts/*.txt at configure time
const BuiltinPrompt kBuiltinPrompts[] = {
#include "prompts.inc"
};

}  // namespace

const char* promptKindName(PromptKind k) {
  switch (k) {
    case PromptKind::Decompose: return "Decompose";
    case PromptKind::DirectProgram: return "DirectProgram";
    case PromptKind::IncrementalConstraint: return "IncrementalConstraint";
    case PromptKind::OptionsCode: return "OptionsCode";
    case PromptKind::ErrorRefine: return "ErrorRefine";
    case PromptKind::Instantiations: return "Instantiations";
    case PromptKind::SemanticRepair: return "SemanticRepair";
    case PromptKind::CotFallback: return "CotFallback";
  }
  return "?";
}

const char* promptFileName(PromptKind k) {
  switch (k) {
    case PromptKind::Decompose: return "decompose";
    case PromptKind::DirectProgram: return "direct_program";
    case PromptKind::IncrementalConstraint: return "incremental_constraint";
    case PromptKind::OptionsCode: return "options_code";
    case PromptKind::ErrorRefine: return "error_refine";
    case PromptKind::Instantiations: return "instantiations";
    case PromptKind::SemanticRepair: return "semantic_repair";
    case PromptKind::CotFallback: return "cot_fallback";
  }
  return "?";
}

std::optional<PromptKind> promptKindFromString(std::string_view s) {
  for (PromptKind k : kAllPromptKinds)
    if (s == promptKindName(k) || s == promptFileName(k)) return k;
  return std::nullopt;
}

// ---- templates ---------------------------------------------------------------

const PromptSet& PromptSet::builtin() {
  static const PromptSet set = [] {
    PromptSet s;
    for (PromptKind k : kAllPromptKinds) {
      for (const auto& b : kBuiltinPrompts)
        if (std::string_view(b.file) == promptFileName(k)) s.texts_[k] = b.text;
      if (!s.texts_.count(k)) throw ConfigError(std::string("no builtin template for ") + promptKindName(k));
    }
    return s;
  }();
  return set;
}

PromptSet PromptSet::fromDirectory(const std::filesystem::path& dir) {
  PromptSet s = builtin();
  for (PromptKind k : kAllPromptKinds) {
    auto file = dir / (std::string(promptFileName(k)) + ".txt");
    if (std::filesystem::exists(file)) s.texts_[k] = readFile(file.string());
  }
  return s;
}

const std::string& PromptSet::text(PromptKind k) const { return texts_.at(k); }

std::vector<std::string> PromptSet::slots(PromptKind k) const {
  std::vector<std::string> out;
  const std::string& t = text(k);
  for (std::size_t i = t.find("{{"); i != std::string::npos; i = t.find("{{", i + 2)) {
    const std::size_t j = t.find("}}", i + 2);
    if (j == std::string::npos) break;
    std::string name = trim(std::string_view(t).substr(i + 2, j - i - 2));
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
  }
  return out;
}

std::string renderPrompt(PromptKind kind, const PromptInputs& inputs, const PromptSet& set) {
  const std::string& t = set.text(kind);
  std::string out;
  out.reserve(t.size() + 1024);
  std::size_t pos = 0;
  for (;;) {
    const std::size_t i = t.find("{{", pos);
    if (i == std::string::npos) break;
    const std::size_t j = t.find("}}", i + 2);
    if (j == std::string::npos) break;
    out.append(t, pos, i - pos);
    const std::string name = trim(std::string_view(t).substr(i + 2, j - i - 2));
    auto it = inputs.find(name);
    if (it == inputs.end())
      throw LlmError(LlmError::Kind::MissingSlot,
                     std::string("template ") + promptFileName(kind) + " needs slot '" + name + "'");
    out += it->second;
    pos = j + 2;
  }
  out.append(t, pos);
  return out;
}

// ---- requests and providers ----------------------------------------------------

std::string transcriptKey(const LlmRequest& req) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.6g", req.temperature);
  std::string material = promptKindName(req.kind);
  material += '\n';
  material += req.model;
  material += '\n';
  material += temp;
  material += '\n';
  material += req.prompt;
  return sha256Hex(material);
}

ScriptedProvider ScriptedProvider::fromFile(const std::filesystem::path& path) {
  return fromJson(readFile(path.string()), path.parent_path());
}

ScriptedProvider ScriptedProvider::fromJson(const std::string& text, const std::filesystem::path& baseDir) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_object() && j.contains("rules")) j = j["rules"];
  if (!j.is_array()) throw ConfigError("script must be a JSON array of rules");
  ScriptedProvider p;
  for (const auto& r : j) {
    Rule rule;
    if (r.contains("kind")) {
      rule.kind = promptKindFromString(r["kind"].get<std::string>());
      if (!rule.kind) throw ConfigError("unknown prompt kind in script: " + r["kind"].get<std::string>());
    }
    if (r.contains("temperature")) rule.temperature = r["temperature"].get<double>();
    if (r.contains("contains")) {
      if (r["contains"].is_string())
        rule.contains.push_back(r["contains"].get<std::string>());
      else
        rule.contains = r["contains"].get<std::vector<std::string>>();
    }
    if (r.contains("response"))
      rule.response = r["response"].get<std::string>();
    else if (r.contains("response_file"))
      rule.response = readFile((baseDir / r["response_file"].get<std::string>()).string());
    else
      throw ConfigError("script rule without response");
    p.rules_.push_back(std::move(rule));
  }
  return p;
}

std::string ScriptedProvider::complete(const LlmRequest& req) {
  for (const auto& r : rules_) {
    if (r.kind && *r.kind != req.kind) continue;
    if (r.temperature && std::fabs(*r.temperature - req.temperature) > 1e-9) continue;
    bool all = true;
    for (const auto& c : r.contains) {
      if (req.prompt.find(c) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (all) return r.response;
  }
  throw LlmError(LlmError::Kind::ProviderError,
                 std::string("no scripted response for ") + promptKindName(req.kind) + " at temperature " +
                     std::to_string(req.temperature));
}

// ---- transcripts -------------------------------------------------------------

std::shared_ptr<TranscriptStore> TranscriptStore::load(const std::filesystem::path& path) {
  auto store = std::make_shared<TranscriptStore>();
  if (!std::filesystem::exists(path)) return store;
  auto j = nlohmann::json::parse(readFile(path.string()), nullptr, false);
  if (!j.is_object()) throw ConfigError("transcript file " + path.string() + " is not a JSON object");
  for (auto& [key, v] : j.items()) {
    TranscriptEntry e;
    e.kind = v.value("kind", "");
    e.model = v.value("model", "");
    e.temperature = v.value("temperature", 0.0);
    e.response = v.value("response", "");
    store->entries_.emplace(key, std::move(e));
  }
  return store;
}

void TranscriptStore::save(const std::filesystem::path& path) const {
  nlohmann::json j = nlohmann::json::object();
  {
    std::lock_guard lock(mu_);
    for (const auto& [key, e] : entries_)
      j[key] = {{"kind", e.kind}, {"model", e.model}, {"temperature", e.temperature}, {"response", e.response}};
  }
  writeFile(path.string(), j.dump(1) + "\n");
}

std::optional<TranscriptEntry> TranscriptStore::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranscriptStore::put(const std::string& key, TranscriptEntry e) {
  std::lock_guard lock(mu_);
  entries_[key] = std::move(e);
}

std::size_t TranscriptStore::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

const char* transcriptModeName(TranscriptMode m) {
  switch (m) {
    case TranscriptMode::Replay: return "replay";
    case TranscriptMode::Record: return "record";
    case TranscriptMode::Live: return "live";
  }
  return "?";
}

LlmGateway::LlmGateway(TranscriptMode mode, std::shared_ptr<TranscriptStore> store,
                       std::shared_ptr<LlmProvider> provider,
                       std::optional<std::filesystem::path> recordPath)
    : mode_(mode),
      store_(store ? std::move(store) : std::make_shared<TranscriptStore>()),
      provider_(std::move(provider)),
      recordPath_(std::move(recordPath)) {
  if (mode_ != TranscriptMode::Replay && !provider_)
    throw LlmError(LlmError::Kind::Config, std::string(transcriptModeName(mode_)) + " mode needs a provider");
}

std::string LlmGateway::complete(const LlmRequest& req) {
  calls_.fetch_add(1);
  const std::string key = transcriptKey(req);
  switch (mode_) {
    case TranscriptMode::Replay: {
      auto e = store_->get(key);
      if (!e)
        throw LlmError(LlmError::Kind::MissingTranscript,
                       std::string("no transcript for ") + promptKindName(req.kind) + " at temperature " +
                           std::to_string(req.temperature) + " (key " + key.substr(0, 16) + ")");
      return e->response;
    }
    case TranscriptMode::Record: {
      // existing entries are reused so a rerun extends rather than rewrites a recording
      if (auto e = store_->get(key)) return e->response;
      std::string text = provider_->complete(req);
      store_->put(key, {promptKindName(req.kind), req.model, req.temperature, text});
      if (recordPath_) {
        std::lock_guard lock(recordMu_);
        store_->save(*recordPath_);
      }
      return text;
    }
    case TranscriptMode::Live: return provider_->complete(req);
  }
  return {};
}

// ---- response parsers ----------------------------------------------------------

std::string stripFences(const std::string& text) {
  std::string out;
  for (const auto& line : splitLines(text)) {
    if (trim(line).rfind("```", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return trim(out);
}

namespace {

struct Section {
  std::string name;
  std::string body;
};

struct Sections {
  std::string preamble;
  std::vector<Section> list;
};

/// Header lines look like "Name:" or ">>> Name:", optionally followed by text.
Sections splitSections(const std::string& text, std::initializer_list<std::string_view> names) {
  Sections out;
  std::string* body = &out.preamble;
  for (const auto& raw : splitLines(stripFences(text))) {
    std::string t = trim(raw);
    if (t.rfind(">>>", 0) == 0) t = trim(std::string_view(t).substr(3));
    std::string_view v = t;
    const std::size_t colon = v.find(':');
    bool header = false;
    if (colon != std::string_view::npos) {
      std::string_view name = v.substr(0, colon);
      for (auto n : names) {
        if (name == n) {
          out.list.push_back({std::string(name), {}});
          body = &out.list.back().body;
          std::string rest = trim(v.substr(colon + 1));
          if (!rest.empty()) *body += rest + "\n";
          header = true;
          break;
        }
      }
    }
    if (!header) {
      *body += raw;
      *body += '\n';
    }
  }
  out.preamble = trim(out.preamble);
  for (auto& s : out.list) s.body = trim(s.body);
  return out;
}

bool isNoneText(const std::string& s) {
  const std::string t = trim(s);
  return t.empty() || t == "NONE" || t == "None" || t == "none" || t == "pass";
}

}  // namespace

Decomposition parseDecomposition(const std::string& response) {
  auto secs = splitSections(response, {"InitialContext", "Constraints"});
  const Section* ctx = nullptr;
  const Section* cons = nullptr;
  for (const auto& s : secs.list) {
    if (s.name == "InitialContext" && !ctx) ctx = &s;
    if (s.name == "Constraints" && !cons) cons = &s;
  }
  if (!ctx) throw FormatError("decomposition lacks an InitialContext: header");
  if (!cons) throw FormatError("decomposition lacks a Constraints: header");
  Decomposition d;
  if (!isNoneText(ctx->body)) d.initialContext = collapseWhitespace(ctx->body);
  std::string cur;
  auto flush = [&] {
    std::string c = collapseWhitespace(cur);
    if (!c.empty()) d.constraints.push_back(c);
    cur.clear();
  };
  for (const auto& line : splitLines(cons->body)) {
    std::string t = trim(line);
    if (!t.empty() && t.find_first_not_of('#') == std::string::npos) {
      flush();
      continue;
    }
    cur += t + "\n";
  }
  flush();
  if (d.constraints.empty()) throw FormatError("decomposition lists no constraints");
  return d;
}

std::vector<InstantiationBlock> parseInstantiationBlocks(const std::string& response) {
  auto secs = splitSections(response, {"Constraint", "PositiveExampleDescription", "PositiveExampleCode",
                                       "NegativeExampleDescription", "NegativeExampleCode"});
  std::vector<InstantiationBlock> blocks;
  std::vector<int> seen;  // bit set of fields per block
  for (const auto& s : secs.list) {
    if (s.name == "Constraint") {
      blocks.push_back({collapseWhitespace(s.body), {}, {}, {}, {}});
      seen.push_back(0);
      continue;
    }
    if (blocks.empty()) throw FormatError(s.name + " before any Constraint: header");
    auto& b = blocks.back();
    int bit = 0;
    if (s.name == "PositiveExampleDescription") b.positiveDescription = collapseWhitespace(s.body), bit = 1;
    if (s.name == "PositiveExampleCode") b.positiveCode = s.body, bit = 2;
    if (s.name == "NegativeExampleDescription") b.negativeDescription = collapseWhitespace(s.body), bit = 4;
    if (s.name == "NegativeExampleCode") b.negativeCode = s.body, bit = 8;
    if (seen.back() & bit) throw FormatError("repeated " + s.name + " in block " + std::to_string(blocks.size()));
    seen.back() |= bit;
  }
  if (blocks.empty()) throw FormatError("no Constraint: blocks in instantiation response");
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (seen[i] != 15) throw FormatError("instantiation block " + std::to_string(i + 1) + " is incomplete");
  return blocks;
}

std::vector<Instantiation> parseInstantiations(const std::string& response, const SegmentedProgram& program) {
  auto blocks = parseInstantiationBlocks(response);
  if (blocks.size() != program.constraints.size())
    throw FormatError("instantiation response has " + std::to_string(blocks.size()) + " blocks for " +
                      std::to_string(program.constraints.size()) + " constraints");
  std::vector<Instantiation> out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    out.push_back(makeInstantiation(program, i, Polarity::Positive, b.positiveDescription, b.positiveCode));
    out.push_back(makeInstantiation(program, i, Polarity::Negative, b.negativeDescription, b.negativeCode));
  }
  return out;
}

std::string parseRefinedProgram(const std::string& response) {
  auto secs = splitSections(response, {"ProblemDiscussion", "CorrectedProgram"});
  for (const auto& s : secs.list) {
    if (s.name != "CorrectedProgram") continue;
    if (s.body.empty()) throw FormatError("CorrectedProgram: is empty");
    return s.body + "\n";
  }
  throw FormatError("response lacks a CorrectedProgram: label");
}

RepairPatch parseRepairPatch(const std::string& response) {
  auto secs = splitSections(response, {"ProblemDiscussion", "RepairedInitialCode", "RepairedConstraintCode",
                                       "RepairedPositiveExampleCode", "RepairedNegativeExampleCode",
                                       "RepairedExampleCode"});
  RepairPatch p;
  p.discussion = secs.preamble;
  bool any = false;
  auto value = [](const std::string& body) -> std::optional<std::string> {
    if (isNoneText(body)) return std::nullopt;
    return body;
  };
  for (const auto& s : secs.list) {
    if (s.name == "ProblemDiscussion") {
      p.discussion = collapseWhitespace(s.body);
      continue;
    }
    any = true;
    if (s.name == "RepairedInitialCode")
      p.initCode = value(s.body);
    else if (s.name == "RepairedConstraintCode")
      p.constraintCode = value(s.body);
    else
      p.exampleCode = value(s.body);
  }
  if (!any) throw FormatError("repair response has no Repaired...Code sections");
  return p;
}

std::optional<OptionLabel> extractCotAnswer(const std::string& response) {
  static const std::regex re(R"([Aa]nswer\s*:\s*\(?\s*([A-Ga-g])\s*\)?(?![A-Za-z]))");
  std::optional<OptionLabel> out;
  for (auto it = std::sregex_iterator(response.begin(), response.end(), re); it != std::sregex_iterator(); ++it)
    out = normalizeLabel((*it)[1].str());
  return out;
}

}  // namespace ssv
