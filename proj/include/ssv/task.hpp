// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ssv {

/// Canonical answer label A..G.
class OptionLabel {
 public:
  OptionLabel() = default;
  /// Throws LabelError unless `c` is in A..G.
  explicit OptionLabel(char c);

  char value() const noexcept { return value_; }
  int index() const noexcept { return value_ - 'A'; }
  std::string str() const { return std::string(1, value_); }

  friend bool operator==(OptionLabel a, OptionLabel b) { return a.value_ == b.value_; }
  friend auto operator<=>(OptionLabel a, OptionLabel b) { return a.value_ <=> b.value_; }

 private:
  char value_ = 'A';
};

/// "(C)" -> C, " a " -> A, "True"/"False"/"Unknown" -> A/B/C. Throws LabelError.
OptionLabel normalizeLabel(const std::string& text);

struct AnswerOption {
  OptionLabel label;
  std::string text;

  bool operator==(const AnswerOption&) const = default;
};

struct ReasoningTask {
  std::string id;
  std::string context;
  std::string question;
  std::vector<AnswerOption> options;
  std::optional<OptionLabel> gold;

  bool hasLabel(OptionLabel l) const;
  /// Throws DatasetError(InvalidTask) on a broken invariant.
  void validate(std::size_t line = 0) const;

  bool operator==(const ReasoningTask&) const = default;
};

struct DatasetHeader {
  std::string schema = "ssv-task/1";
  std::map<std::string, std::string> labelMap;
};

std::vector<ReasoningTask> loadDataset(const std::filesystem::path& path,
                                       std::optional<std::size_t> limit = std::nullopt,
                                       DatasetHeader* header = nullptr);

void writeDataset(const std::filesystem::path& path, const std::vector<ReasoningTask>& tasks,
                  const std::optional<DatasetHeader>& header = std::nullopt);

/// One task as a JSON object string (the dataset line format).
std::string taskToJson(const ReasoningTask& task);
ReasoningTask taskFromJson(const std::string& line, std::size_t lineNo = 0);

}  // namespace ssv
