/*
 * Copyright 2026 The AlphaTree Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "alphatree/cli.h"
#include "alphatree/io.h"
#include "alphatree/metrics.h"

namespace alphatree {
namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult Cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult run;
  run.code = RunMain(args, out, err);
  run.out = out.str();
  run.err = err.str();
  return run;
}

std::string ReadAll(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> Cells(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) cells.push_back(cell);
  return cells;
}

std::map<std::string, double> ReportValues(const std::string& csv) {
  std::map<std::string, double> values;
  const std::vector<std::string> lines = Lines(csv);
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> cells = Cells(lines[i]);
    values[cells[0]] = std::stod(cells[1]);
  }
  return values;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("alphatree_cli_" + std::string(::testing::UnitTest::GetInstance()
                                               ->current_test_info()
                                               ->name()));
    fs::create_directories(dir_);
    std::ofstream schema(Path("schema.json"));
    schema << R"({
  "label_column": "y",
  "group_column": "s",
  "score_column": "score",
  "features": [{"name": "x", "kind": "numeric"}, {"name": "c", "kind": "categorical"}],
  "clip_B": 2.0
})";
    std::ofstream data(Path("data.csv"));
    data << "x,c,s,y,score\n";
    std::mt19937_64 rng(401);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const char* categories[] = {"u", "v"};
    for (int i = 0; i < 400; ++i) {
      const double x = unit(rng);
      const bool b = i % 2 == 1;
      const double eta = 0.2 + 0.6 * x;
      const int y = unit(rng) < eta ? 1 : 0;
      // Group b is scored too low.
      const double score = b ? 0.1 + 0.3 * x : 0.2 + 0.6 * x;
      data << x << ',' << categories[rng() % 2] << ',' << (b ? "b" : "a") << ',' << y << ','
           << score << '\n';
    }
  }

  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  std::vector<std::string> TrainArgs(const std::string& strategy, const std::string& out) const {
    return {"train",   "--data",       Path("data.csv"), "--schema", Path("schema.json"),
            "--strategy", strategy,   "--out",           out,        "--iterations",
            "6",       "--min-child-count", "10"};
  }

  fs::path dir_;
};

TEST_F(CliTest, TrainThenApply) {
  const CliResult train = Cli(TrainArgs("cvar", Path("model.json")));
  ASSERT_EQ(train.code, 0) << train.err;
  EXPECT_NE(train.out.find("stop: "), std::string::npos);
  EXPECT_FALSE(fs::exists(Path("model.json.tmp")));

  const CliResult apply = Cli({"apply", "--model", Path("model.json"), "--data", Path("data.csv")});
  ASSERT_EQ(apply.code, 0) << apply.err;
  const std::vector<std::string> lines = Lines(apply.out);
  ASSERT_EQ(lines.size(), 401u);
  EXPECT_EQ(lines[0], "row,q_unfair,q_fair,leaf,alpha");

  const Model model = LoadModel(Path("model.json"));
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> cells = Cells(lines[i]);
    ASSERT_EQ(cells.size(), 5u);
    const double q = std::stod(cells[1]);
    const double alpha = std::stod(cells[4]);
    // Power form of the wrap, computed here independently.
    const double a = std::pow(q, alpha);
    const double b = std::pow(1.0 - q, alpha);
    EXPECT_NEAR(std::stod(cells[2]), a / (a + b), 1e-12);
    EXPECT_EQ(model.tree.leaf(std::stoi(cells[3])).alpha, alpha);
  }
}

TEST_F(CliTest, EvalCvarMatchesLibrary) {
  ASSERT_EQ(Cli(TrainArgs("cvar", Path("model.json"))).code, 0);
  const CliResult eval = Cli({"eval", "--model", Path("model.json"), "--data", Path("data.csv"),
                        "--beta", "0.8"});
  ASSERT_EQ(eval.code, 0) << eval.err;
  const std::map<std::string, double> values = ReportValues(eval.out);
  for (const char* key : {"cvar", "eoo_gap", "sp_gap", "md", "zero_one_error", "auc", "logloss",
                          "empirical_kl", "s1_applicable", "s2_applicable"}) {
    EXPECT_TRUE(values.contains(key)) << key;
  }
  SchemaConfig schema = SchemaConfig::Load(Path("schema.json"));
  const Dataset data = LoadDataset(Path("data.csv"), schema);
  const Model model = LoadModel(Path("model.json"));
  EXPECT_NEAR(values.at("cvar"), CvarMetric(data, model.tree, 0.8), 1e-12);
  EXPECT_NEAR(values.at("sp_gap"), SpGap(data, model.tree), 1e-12);
}

TEST_F(CliTest, InspectIdentityStump) {
  const CliResult train = Cli({"train", "--data", Path("data.csv"), "--schema", Path("schema.json"),
                         "--strategy", "sp", "--out", Path("stump.json"), "--iterations", "0"});
  ASSERT_EQ(train.code, 0) << train.err;
  const CliResult inspect = Cli({"inspect", "--model", Path("stump.json")});
  ASSERT_EQ(inspect.code, 0) << inspect.err;
  EXPECT_NE(inspect.out.find("identity (α=1)"), std::string::npos) << inspect.out;
  // One identity leaf per group.
  EXPECT_NE(inspect.out.find("leaves: 2"), std::string::npos) << inspect.out;
  EXPECT_EQ(inspect.out.find("sharpening"), std::string::npos);
  EXPECT_EQ(inspect.out.find("dampening"), std::string::npos);
}

TEST_F(CliTest, InspectListsGroups) {
  AlphaTree tree;
  const auto [left, right] = tree.SplitLeaf(0, SplitTest::Categorical("s", "b"));
  tree.SetLeafAlpha(left, 2.0);
  tree.SetLeafAlpha(right, 0.5);
  ModelMeta meta;
  meta.clip_B = 2.0;
  meta.group_column = "s";
  meta.strategy = "cvar";
  SaveModel(tree, meta, Path("model.json"));
  const CliResult inspect = Cli({"inspect", "--model", Path("model.json")});
  ASSERT_EQ(inspect.code, 0);
  const size_t b = inspect.out.find("s = b:");
  const size_t other = inspect.out.find("s = any other value:");
  ASSERT_NE(b, std::string::npos);
  ASSERT_NE(other, std::string::npos);
  EXPECT_NE(inspect.out.find("sharpening", b), std::string::npos);
  EXPECT_NE(inspect.out.find("dampening", other), std::string::npos);
}

TEST_F(CliTest, ConflictingFlagsExitOne) {
  std::vector<std::string> args = TrainArgs("cvar", Path("model.json"));
  args.insert(args.end(), {"--epsilon", "0.1"});
  const CliResult run = Cli(args);
  EXPECT_EQ(run.code, 1);
  EXPECT_NE(run.err.find("conflicting"), std::string::npos);
  EXPECT_FALSE(fs::exists(Path("model.json")));

  args = TrainArgs("sp", Path("model.json"));
  args.insert(args.end(), {"--proxy-depth", "3"});
  EXPECT_EQ(Cli(args).code, 1);
}

TEST_F(CliTest, BadInputsFail) {
  EXPECT_NE(Cli({}).code, 0);
  EXPECT_NE(Cli({"train", "--data", Path("data.csv")}).code, 0);
  EXPECT_EQ(Cli({"inspect", "--model", Path("missing.json")}).code, 1);
  EXPECT_NE(Cli(TrainArgs("bogus", Path("model.json"))).code, 0);
}

TEST_F(CliTest, TrainingIsDeterministic) {
  for (const char* strategy : {"cvar", "sp", "eoo"}) {
    std::vector<std::string> first = TrainArgs(strategy, Path("one.json"));
    std::vector<std::string> second = TrainArgs(strategy, Path("two.json"));
    for (auto* args : {&first, &second}) args->insert(args->end(), {"--seed", "7"});
    ASSERT_EQ(Cli(first).code, 0) << strategy;
    ASSERT_EQ(Cli(second).code, 0) << strategy;
    EXPECT_EQ(ReadAll(Path("one.json")), ReadAll(Path("two.json"))) << strategy;
  }
}

TEST_F(CliTest, TraceMatchesTrainTrace) {
  std::vector<std::string> train = TrainArgs("sp", Path("model.json"));
  train.insert(train.end(), {"--trace", Path("trace.csv")});
  ASSERT_EQ(Cli(train).code, 0);
  std::vector<std::string> trace = TrainArgs("sp", Path("unused"));
  trace[0] = "trace";
  trace.erase(trace.begin() + 7, trace.begin() + 9);  // drop --out
  const CliResult run = Cli(trace);
  ASSERT_EQ(run.code, 0) << run.err;
  EXPECT_EQ(run.out, ReadAll(Path("trace.csv")));
  EXPECT_NE(run.out.find("sp_gap"), std::string::npos);
}

TEST_F(CliTest, SplitPlan) {
  const CliResult run = Cli({"split", "--data", Path("data.csv"), "--schema", Path("schema.json"),
                       "--seed", "3"});
  ASSERT_EQ(run.code, 0) << run.err;
  const std::vector<std::string> lines = Lines(run.out);
  ASSERT_EQ(lines.size(), 401u);
  EXPECT_EQ(lines[0], "row,test_fold,fold0,fold1,fold2,fold3,fold4");
  std::vector<int> test_rows(5, 0);
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> cells = Cells(lines[i]);
    const int fold = std::stoi(cells[1]);
    ++test_rows[fold];
    EXPECT_EQ(cells[2 + fold], "test");
  }
  for (int count : test_rows) EXPECT_EQ(count, 80);
  EXPECT_EQ(Cli({"split", "--data", Path("data.csv"), "--schema", Path("schema.json"),
                 "--seed", "3"})
                .out,
            run.out);
  EXPECT_EQ(Cli({"split", "--data", Path("data.csv"), "--schema", Path("schema.json"),
                 "--folds", "1"})
                .code,
            1);
}

TEST_F(CliTest, BinaryExitCodes) {
  const std::string binary = ALPHATREE_BINARY;
  const std::string ok = binary + " inspect --model " + Path("absent.json") + " 2>/dev/null";
  EXPECT_EQ(WEXITSTATUS(std::system(ok.c_str())), 1);
  const std::string help = binary + " --help >/dev/null";
  EXPECT_EQ(WEXITSTATUS(std::system(help.c_str())), 0);
}

}  // namespace
}  // namespace alphatree
