// SPDX-License-Identifier: Apache-2.0
#include "ssv/task.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <json.hpp>

#include "ssv/error.hpp"

namespace ssv {

using nlohmann::json;

OptionLabel::OptionLabel(char c) : value_(c) {
  if (c < 'A' || c > 'G') throw LabelError(std::string("label out of range: ") + c);
}

OptionLabel normalizeLabel(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')') continue;
    s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'G') return OptionLabel(s[0]);
  if (s == "TRUE") return OptionLabel('A');
  if (s == "FALSE") return OptionLabel('B');
  if (s == "UNKNOWN") return OptionLabel('C');
  throw LabelError("unrecognized label: \"" + text + "\"");
}

bool ReasoningTask::hasLabel(OptionLabel l) const {
  return std::any_of(options.begin(), options.end(),
                     [&](const AnswerOption& o) { return o.label == l; });
}

void ReasoningTask::validate(std::size_t line) const {
  std::set<char> seen;
  for (const auto& o : options) {
    if (!seen.insert(o.label.value()).second)
      throw DatasetError(DatasetError::Kind::DuplicateLabel, line,
                         "duplicate option label " + o.label.str() + " in task " + id);
  }
  // Two options with the same text cannot be told apart by any program; reject rather than pick one.
  std::set<std::string> texts;
  for (const auto& o : options)
    if (!texts.insert(o.text).second)
      throw DatasetError(DatasetError::Kind::DuplicateLabel, line,
                         "options of task " + id + " repeat the text \"" + o.text + "\"");
  if (options.size() < 2 || options.size() > 7)
    throw DatasetError(DatasetError::Kind::InvalidTask, line,
                       "task " + id + " has " + std::to_string(options.size()) +
                           " options (expected 2..7)");
  // labels must form a prefix of A..G
  char expect = 'A';
  for (char c : seen) {
    if (c != expect)
      throw DatasetError(DatasetError::Kind::InvalidTask, line,
                         "option labels of task " + id + " are not a prefix of A..G");
    ++expect;
  }
  if (gold && !hasLabel(*gold))
    throw DatasetError(DatasetError::Kind::InvalidTask, line,
                       "gold label " + gold->str() + " is not an option of task " + id);
}

namespace {

std::string requireString(const json& j, const char* field, std::size_t line) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string())
    throw DatasetError(DatasetError::Kind::MissingField, line,
                       std::string("missing string field '") + field + "'");
  return it->get<std::string>();
}

OptionLabel labelAt(const std::string& s, std::size_t line) {
  try {
    return normalizeLabel(s);
  } catch (const LabelError& e) {
    throw DatasetError(DatasetError::Kind::InvalidTask, line, e.what());
  }
}

}  // namespace

ReasoningTask taskFromJson(const std::string& text, std::size_t line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DatasetError(DatasetError::Kind::InvalidTask, line, std::string("bad JSON: ") + e.what());
  }
  if (!j.is_object()) throw DatasetError(DatasetError::Kind::InvalidTask, line, "not an object");

  ReasoningTask t;
  t.id = requireString(j, "id", line);
  t.context = requireString(j, "context", line);
  t.question = requireString(j, "question", line);
  auto opts = j.find("options");
  if (opts == j.end() || !opts->is_array())
    throw DatasetError(DatasetError::Kind::MissingField, line, "missing array field 'options'");
  for (const auto& o : *opts) {
    if (!o.is_array() || o.size() != 2 || !o[0].is_string() || !o[1].is_string())
      throw DatasetError(DatasetError::Kind::InvalidTask, line,
                         "options entries must be [label, text] pairs");
    t.options.push_back({labelAt(o[0].get<std::string>(), line), o[1].get<std::string>()});
  }
  if (auto g = j.find("gold"); g != j.end() && !g->is_null()) {
    if (!g->is_string()) throw DatasetError(DatasetError::Kind::InvalidTask, line, "gold must be a string");
    t.gold = labelAt(g->get<std::string>(), line);
  }
  t.validate(line);
  return t;
}

std::string taskToJson(const ReasoningTask& t) {
  json j;
  j["id"] = t.id;
  j["context"] = t.context;
  j["question"] = t.question;
  j["options"] = json::array();
  for (const auto& o : t.options) j["options"].push_back({o.label.str(), o.text});
  if (t.gold) j["gold"] = t.gold->str();
  return j.dump();
}

std::vector<ReasoningTask> loadDataset(const std::filesystem::path& path,
                                       std::optional<std::size_t> limit, DatasetHeader* header) {
  std::ifstream in(path);
  if (!in) throw DatasetError(DatasetError::Kind::UnreadableFile, 0, "cannot read " + path.string());

  std::vector<ReasoningTask> tasks;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (limit && tasks.size() >= *limit) break;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    if (lineNo == 1 && line.find("\"schema\"") != std::string::npos) {
      json h = json::parse(line, nullptr, false);
      if (h.is_object() && h.contains("schema")) {
        if (header) {
          header->schema = h.value("schema", "");
          if (h.contains("label_map"))
            header->labelMap = h["label_map"].get<std::map<std::string, std::string>>();
        }
        continue;
      }
    }
    tasks.push_back(taskFromJson(line, lineNo));
  }
  return tasks;
}

void writeDataset(const std::filesystem::path& path, const std::vector<ReasoningTask>& tasks,
                  const std::optional<DatasetHeader>& header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  if (header) {
    json h{{"schema", header->schema}, {"label_map", header->labelMap}};
    out << h.dump() << '\n';
  }
  for (const auto& t : tasks) out << taskToJson(t) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ssv
