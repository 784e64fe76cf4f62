// SPDX-License-Identifier: Apache-2.0
//
// Dataset evaluation, metrics, ablation grids and reports.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssv/pipeline.hpp"

namespace ssv {

struct TaskRecord {
  std::string taskId;
  std::optional<OptionLabel> answer;
  bool verified = false;
  std::optional<OptionLabel> gold;
  bool correct = false;
  bool usedFallback = false;
  bool programProduced = false;
  std::optional<double> temperatureUsed;
  int repairsUsed = 0;
  int llmCalls = 0;
  std::string error;  // set when the task aborted
  double timingMs = 0;  // not part of reports, machine dependent

  /// Everything except timingMs.
  bool sameOutcome(const TaskRecord& o) const;
};

/// Counts are exact; percentages are derived from them.
struct RunMetrics {
  long long total = 0;
  long long correct = 0;
  long long verified = 0;
  long long verifiedCorrect = 0;
  long long programTasks = 0;  // final answer came from a program
  long long programCorrect = 0;

  double generalAccuracy() const;
  double coverage() const;
  std::optional<double> precision() const;  // undefined when nothing is verified
  std::optional<double> programAccuracy() const;

  /// One decimal, or "-" when undefined.
  std::string accuracyText() const;
  std::string coverageText() const;
  std::string precisionText() const;
  std::string programAccuracyText() const;

  bool operator==(const RunMetrics&) const = default;
};

RunMetrics computeMetrics(const std::vector<TaskRecord>& records);

TaskRecord makeRecord(const ReasoningTask& task, const SsvResult& r);

struct Evaluation {
  std::vector<TaskRecord> records;
  RunMetrics metrics;
};

/// Runs every task; a task that throws is recorded with its error and counted as unanswered.
/// `workers` tasks run at a time; records keep dataset order.
Evaluation evaluate(const std::vector<ReasoningTask>& tasks, const SsvConfig& config, LlmGateway& llm,
                    SatChecker& checker, const PromptSet& prompts = PromptSet::builtin());

struct AblationGrid {
  std::vector<int> maxRepairs;
  std::vector<std::vector<double>> temperatures;

  /// {"maxRepairs": [...], "temperatures": [[...], ...]} or "temperaturePrefixes": [k, ...]
  /// taking the first k temperatures of `base`.
  static AblationGrid fromJson(const std::string& text, const SsvConfig& base);
};

struct AblationCell {
  int maxRepairs = 0;
  std::vector<double> temperatures;
  RunMetrics metrics;
};

std::vector<AblationCell> ablationGrid(const std::vector<ReasoningTask>& tasks, const SsvConfig& base,
                                       const AblationGrid& grid, LlmGateway& llm, SatChecker& checker,
                                       const PromptSet& prompts = PromptSet::builtin());

enum class ReportFormat { Json, Csv };

std::string metricsToJson(const RunMetrics& m, int indent = 2);
std::string reportToJson(const std::vector<TaskRecord>& records, const RunMetrics& metrics);
std::string reportToCsv(const std::vector<TaskRecord>& records, const RunMetrics& metrics);
std::string ablationToJson(const std::vector<AblationCell>& cells);
/// Per-task milliseconds with median and quartiles.
std::string timingsToJson(const std::vector<TaskRecord>& records);

/// Throws IoError.
void writeReport(const std::vector<TaskRecord>& records, const RunMetrics& metrics, const std::string& path,
                 ReportFormat format);
/// Reads a JSON report back.
Evaluation readReport(const std::string& path);

}  // namespace ssv
