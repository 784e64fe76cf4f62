// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ssv/error.hpp"
#include "ssv/task.hpp"
#include "support/fixtures.hpp"

using namespace ssv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name, const std::string& body) {
  const auto p = fs::temp_directory_path() / ("ssv_task_" + name + ".jsonl");
  std::ofstream(p) << body;
  return p;
}

DatasetError loadFailure(const std::string& body) {
  const auto p = scratch("bad", body);
  try {
    loadDataset(p);
  } catch (const DatasetError& e) {
    fs::remove(p);
    return e;
  }
  fs::remove(p);
  ADD_FAILURE() << "expected a DatasetError";
  return DatasetError(DatasetError::Kind::InvalidTask, 0, "");
}

const char* kLine = R"({"id":"t1","context":"...","question":"...","options":[["A","fish"],["B","hot cakes"]],"gold":"A"})";

}  // namespace

TEST(Labels, Normalize) {
  EXPECT_EQ(normalizeLabel("(C)"), OptionLabel('C'));
  EXPECT_EQ(normalizeLabel(" a "), OptionLabel('A'));
  EXPECT_EQ(normalizeLabel("True"), OptionLabel('A'));
  EXPECT_EQ(normalizeLabel("false"), OptionLabel('B'));
  EXPECT_EQ(normalizeLabel("Unknown"), OptionLabel('C'));
  EXPECT_THROW(normalizeLabel("maybe"), LabelError);
  EXPECT_THROW(normalizeLabel("H"), LabelError);
  for (const char* s : {"(C)", " a ", "True", "g"}) {
    const auto once = normalizeLabel(s);
    EXPECT_EQ(normalizeLabel(once.str()), once) << s;
  }
}

TEST(Dataset, SingleLine) {
  const auto p = scratch("one", std::string(kLine) + "\n");
  const auto tasks = loadDataset(p);
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(tasks[0].options[1].label, OptionLabel('B'));
  EXPECT_EQ(tasks[0].options[1].text, "hot cakes");
  EXPECT_EQ(tasks[0].gold, OptionLabel('A'));
  fs::remove(p);
}

TEST(Dataset, EmptyFileAndLimit) {
  const auto empty = scratch("empty", "");
  EXPECT_TRUE(loadDataset(empty).empty());
  fs::remove(empty);
  EXPECT_EQ(loadDataset(ssv::testing::fixturePath("dataset/tasks.jsonl"), 3).size(), 3u);
}

TEST(Dataset, Errors) {
  auto e = loadFailure(std::string(kLine) + "\n" +
                       R"({"id":"t2","context":"c","question":"q","options":[["A","x"],["A","y"]]})" + "\n");
  EXPECT_EQ(e.kind(), DatasetError::Kind::DuplicateLabel);
  EXPECT_EQ(e.line(), 2u);
  e = loadFailure(R"({"id":"t3","context":"c","question":"q","options":[["A","x"],["B","x"]]})");
  EXPECT_EQ(e.kind(), DatasetError::Kind::DuplicateLabel);
  e = loadFailure(R"({"id":"t4","context":"c","options":[["A","x"],["B","y"]]})");
  EXPECT_EQ(e.kind(), DatasetError::Kind::MissingField);
  EXPECT_THROW(loadDataset("/nonexistent/tasks.jsonl"), DatasetError);
}

TEST(Dataset, RoundTripWithHeader) {
  auto tasks = loadDataset(ssv::testing::fixturePath("dataset/tasks.jsonl"));
  DatasetHeader h;
  h.labelMap = {{"True", "A"}, {"False", "B"}, {"Unknown", "C"}};
  const auto p = fs::temp_directory_path() / "ssv_task_rt.jsonl";
  writeDataset(p, tasks, h);
  DatasetHeader back;
  EXPECT_EQ(loadDataset(p, std::nullopt, &back), tasks);
  EXPECT_EQ(back.labelMap, h.labelMap);
  fs::remove(p);
}
