// SPDX-License-Identifier: Apache-2.0
#include "ssv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <json.hpp>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "ssv/util.hpp"

namespace ssv {

using nlohmann::json;

bool TaskRecord::sameOutcome(const TaskRecord& o) const {
  return taskId == o.taskId && answer == o.answer && verified == o.verified && gold == o.gold &&
         correct == o.correct && usedFallback == o.usedFallback && programProduced == o.programProduced &&
         temperatureUsed == o.temperatureUsed && repairsUsed == o.repairsUsed && llmCalls == o.llmCalls &&
         error == o.error;
}

namespace {
double pct(long long num, long long den) { return den > 0 ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0; }
}  // namespace

double RunMetrics::generalAccuracy() const { return pct(correct, total); }
double RunMetrics::coverage() const { return pct(verified, total); }
std::optional<double> RunMetrics::precision() const {
  if (verified == 0) return std::nullopt;
  return pct(verifiedCorrect, verified);
}
std::optional<double> RunMetrics::programAccuracy() const {
  if (programTasks == 0) return std::nullopt;
  return pct(programCorrect, programTasks);
}

std::string RunMetrics::accuracyText() const { return formatPercent(correct, total); }
std::string RunMetrics::coverageText() const { return formatPercent(verified, total); }
std::string RunMetrics::precisionText() const { return formatPercent(verifiedCorrect, verified); }
std::string RunMetrics::programAccuracyText() const { return formatPercent(programCorrect, programTasks); }

RunMetrics computeMetrics(const std::vector<TaskRecord>& records) {
  RunMetrics m;
  for (const auto& r : records) {
    ++m.total;
    if (r.correct) ++m.correct;
    if (r.verified) {
      ++m.verified;
      if (r.correct) ++m.verifiedCorrect;
    }
    if (r.programProduced && !r.usedFallback) {
      ++m.programTasks;
      if (r.correct) ++m.programCorrect;
    }
  }
  return m;
}

TaskRecord makeRecord(const ReasoningTask& task, const SsvResult& r) {
  TaskRecord rec;
  rec.taskId = task.id;
  rec.answer = r.answer;
  rec.verified = r.verified;
  rec.gold = task.gold;
  rec.correct = task.gold && r.answer && *task.gold == *r.answer;
  rec.usedFallback = r.trace.usedFallback;
  rec.programProduced = r.trace.programProduced;
  rec.temperatureUsed = r.trace.temperatureUsed;
  rec.repairsUsed = r.trace.repairsUsed;
  rec.llmCalls = r.trace.llmCalls;
  return rec;
}

Evaluation evaluate(const std::vector<ReasoningTask>& tasks, const SsvConfig& config, LlmGateway& llm,
                    SatChecker& checker, const PromptSet& prompts) {
  Pipeline pipeline(config, llm, checker, prompts);
  Evaluation ev;
  ev.records.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      const auto& task = tasks[i];
      const auto start = std::chrono::steady_clock::now();
      TaskRecord rec;
      try {
        rec = makeRecord(task, pipeline.run(task));
      } catch (const std::exception& e) {
        spdlog::warn("task {} failed: {}", task.id, e.what());
        rec = TaskRecord{};
        rec.taskId = task.id;
        rec.gold = task.gold;
        rec.error = e.what();
      }
      rec.timingMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      ev.records[i] = std::move(rec);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(config.parallelism, static_cast<unsigned>(tasks.size())));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  ev.metrics = computeMetrics(ev.records);
  return ev;
}

AblationGrid AblationGrid::fromJson(const std::string& text, const SsvConfig& base) {
  json j = json::parse(text, nullptr, false);
  if (!j.is_object()) throw ConfigError("ablation grid must be a JSON object");
  AblationGrid g;
  try {
    if (j.contains("maxRepairs")) g.maxRepairs = j["maxRepairs"].get<std::vector<int>>();
    if (j.contains("temperatures")) g.temperatures = j["temperatures"].get<std::vector<std::vector<double>>>();
    if (j.contains("temperaturePrefixes")) {
      for (int k : j["temperaturePrefixes"].get<std::vector<int>>()) {
        if (k < 1 || k > static_cast<int>(base.temperatures.size()))
          throw ConfigError("temperature prefix " + std::to_string(k) + " is out of range");
        g.temperatures.emplace_back(base.temperatures.begin(), base.temperatures.begin() + k);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("ablation grid: ") + e.what());
  }
  for (auto& [k, _] : j.items())
    if (k != "maxRepairs" && k != "temperatures" && k != "temperaturePrefixes")
      throw ConfigError("unknown ablation key '" + k + "'");
  if (g.maxRepairs.empty() && g.temperatures.empty()) throw ConfigError("ablation grid is empty");
  return g;
}

std::vector<AblationCell> ablationGrid(const std::vector<ReasoningTask>& tasks, const SsvConfig& base,
                                       const AblationGrid& grid, LlmGateway& llm, SatChecker& checker,
                                       const PromptSet& prompts) {
  const std::vector<int> repairs = grid.maxRepairs.empty() ? std::vector<int>{base.maxRepairs} : grid.maxRepairs;
  const auto temps = grid.temperatures.empty() ? std::vector<std::vector<double>>{base.temperatures} : grid.temperatures;
  std::vector<AblationCell> cells;
  for (int r : repairs) {
    for (const auto& t : temps) {
      SsvConfig cfg = base;
      cfg.maxRepairs = r;
      cfg.temperatures = t;
      cfg.validate();
      cells.push_back({r, t, evaluate(tasks, cfg, llm, checker, prompts).metrics});
    }
  }
  return cells;
}

// ---- reports -------------------------------------------------------------------

namespace {

json optLabel(const std::optional<OptionLabel>& l) { return l ? json(l->str()) : json(nullptr); }
json optNum(const std::optional<double>& d) { return d ? json(*d) : json(nullptr); }

json metricsJson(const RunMetrics& m) {
  return {
      {"counts",
       {{"total", m.total},
        {"correct", m.correct},
        {"verified", m.verified},
        {"verifiedCorrect", m.verifiedCorrect},
        {"programTasks", m.programTasks},
        {"programCorrect", m.programCorrect}}},
      {"generalAccuracy", m.accuracyText()},
      {"coverage", m.coverageText()},
      {"precision", m.verified ? json(m.precisionText()) : json(nullptr)},
      {"programAccuracy", m.programTasks ? json(m.programAccuracyText()) : json(nullptr)},
  };
}

json recordJson(const TaskRecord& r) {
  json j = {{"taskId", r.taskId},
            {"answer", optLabel(r.answer)},
            {"gold", optLabel(r.gold)},
            {"correct", r.correct},
            {"verified", r.verified},
            {"usedFallback", r.usedFallback},
            {"programProduced", r.programProduced},
            {"temperatureUsed", optNum(r.temperatureUsed)},
            {"repairsUsed", r.repairsUsed},
            {"llmCalls", r.llmCalls}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

std::string csvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string tempText(const std::optional<double>& t) {
  if (!t) return "";
  std::ostringstream o;
  o << *t;
  return o.str();
}

}  // namespace

std::string metricsToJson(const RunMetrics& m, int indent) { return metricsJson(m).dump(indent); }

std::string reportToJson(const std::vector<TaskRecord>& records, const RunMetrics& metrics) {
  json recs = json::array();
  for (const auto& r : records) recs.push_back(recordJson(r));
  return json{{"metrics", metricsJson(metrics)}, {"records", recs}}.dump(2) + "\n";
}

std::string reportToCsv(const std::vector<TaskRecord>& records, const RunMetrics& m) {
  std::ostringstream out;
  out << "task_id,answer,gold,correct,verified,used_fallback,program_produced,temperature_used,repairs_used,llm_calls,error\n";
  for (const auto& r : records) {
    out << csvField(r.taskId) << ',' << (r.answer ? r.answer->str() : "") << ',' << (r.gold ? r.gold->str() : "")
        << ',' << r.correct << ',' << r.verified << ',' << r.usedFallback << ',' << r.programProduced << ','
        << tempText(r.temperatureUsed) << ',' << r.repairsUsed << ',' << r.llmCalls << ',' << csvField(r.error)
        << '\n';
  }
  out << "#metrics,total=" << m.total << ",accuracy=" << m.accuracyText() << ",coverage=" << m.coverageText()
      << ",precision=" << m.precisionText() << ",program_accuracy=" << m.programAccuracyText() << '\n';
  return out.str();
}

std::string ablationToJson(const std::vector<AblationCell>& cells) {
  json arr = json::array();
  for (const auto& c : cells)
    arr.push_back({{"maxRepairs", c.maxRepairs}, {"temperatures", c.temperatures}, {"metrics", metricsJson(c.metrics)}});
  return arr.dump(2) + "\n";
}

std::string timingsToJson(const std::vector<TaskRecord>& records) {
  std::vector<double> ms;
  json per = json::object();
  for (const auto& r : records) {
    ms.push_back(r.timingMs);
    per[r.taskId] = r.timingMs;
  }
  std::sort(ms.begin(), ms.end());
  auto quantile = [&](double q) -> json {
    if (ms.empty()) return nullptr;
    const double pos = q * static_cast<double>(ms.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, ms.size() - 1);
    return ms[lo] + (ms[hi] - ms[lo]) * (pos - static_cast<double>(lo));
  };
  return json{{"tasks", per}, {"q1", quantile(0.25)}, {"median", quantile(0.5)}, {"q3", quantile(0.75)}}.dump(2) + "\n";
}

void writeReport(const std::vector<TaskRecord>& records, const RunMetrics& metrics, const std::string& path,
                 ReportFormat format) {
  writeFile(path, format == ReportFormat::Json ? reportToJson(records, metrics) : reportToCsv(records, metrics));
}

Evaluation readReport(const std::string& path) {
  json j = json::parse(readFile(path), nullptr, false);
  if (!j.is_object() || !j.contains("records")) throw IoError(path + " is not a report");
  auto label = [](const json& v) -> std::optional<OptionLabel> {
    if (v.is_null()) return std::nullopt;
    return normalizeLabel(v.get<std::string>());
  };
  Evaluation ev;
  for (const auto& r : j["records"]) {
    TaskRecord t;
    t.taskId = r.at("taskId").get<std::string>();
    t.answer = label(r.at("answer"));
    t.gold = label(r.at("gold"));
    t.correct = r.at("correct").get<bool>();
    t.verified = r.at("verified").get<bool>();
    t.usedFallback = r.at("usedFallback").get<bool>();
    t.programProduced = r.at("programProduced").get<bool>();
    if (!r.at("temperatureUsed").is_null()) t.temperatureUsed = r["temperatureUsed"].get<double>();
    t.repairsUsed = r.at("repairsUsed").get<int>();
    t.llmCalls = r.at("llmCalls").get<int>();
    t.error = r.value("error", "");
    ev.records.push_back(std::move(t));
  }
  ev.metrics = computeMetrics(ev.records);
  return ev;
}

}  // namespace ssv
