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

#include "alphatree/cli.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "alphatree/boosting.h"
#include "alphatree/errors.h"
#include "alphatree/estimators.h"
#include "alphatree/fairness.h"
#include "alphatree/io.h"
#include "alphatree/metrics.h"

namespace alphatree {
namespace {

std::string Num(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

// Writes through a temporary file so readers never see a partial artifact.
void WriteFile(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << content;
    if (!out) throw FormatError("failed writing '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError("cannot move output into '" + path + "': " + ec.message());
}

// Output goes to `path`, or to `out` when the path is empty or "-".
void Emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    WriteFile(path, content);
  }
}

struct TrainFlags {
  std::string data;
  std::string schema;
  std::string strategy;
  std::string out;
  std::string trace;
  double beta = 0.9;
  double epsilon = 0.1;
  double K = 2.0;
  std::string direction = "up";
  std::string scoring = "conservative";
  int iterations = 32;
  std::string init = "stump";
  int proxy_depth = 8;
  std::uint64_t seed = 0;
  double risk_threshold = 0.0;
  int outer_rounds = 64;
  std::string eta = "auto";
  int min_child_count = 30;
  double min_child_fraction = 0.10;

  std::map<std::string, CLI::Option*> options;

  bool Given(const std::string& name) const { return options.at(name)->count() > 0; }
};

void AddTrainFlags(CLI::App* app, TrainFlags& f, bool needs_out) {
  auto add = [&](const std::string& name, auto& target, const std::string& help) {
    f.options[name] = app->add_option("--" + name, target, help);
    return f.options[name];
  };
  add("data", f.data, "dataset CSV")->required();
  add("schema", f.schema, "schema JSON")->required();
  add("strategy", f.strategy, "cvar | eoo | sp")
      ->required()
      ->check(CLI::IsMember({"cvar", "eoo", "sp"}));
  if (needs_out) {
    add("out", f.out, "model file to write")->required();
    add("trace", f.trace, "also write the trace CSV here");
  } else {
    add("out", f.out, "trace CSV (stdout when omitted)");
  }
  add("beta", f.beta, "CVaR level (cvar)");
  add("risk-threshold", f.risk_threshold, "stop once CVaR falls to this (cvar)");
  add("outer-rounds", f.outer_rounds, "round limit (cvar, sp)");
  add("epsilon", f.epsilon, "fairness tolerance (eoo, sp)");
  add("K", f.K, "pushup constant (eoo)");
  add("eta", f.eta, "target posterior for eoo: auto | gaussian | column | labels")
      ->check(CLI::IsMember({"auto", "gaussian", "column", "labels"}));
  add("direction", f.direction, "up | down (sp)")->check(CLI::IsMember({"up", "down"}));
  add("scoring", f.scoring, "conservative | audacious")
      ->check(CLI::IsMember({"conservative", "audacious"}));
  add("iterations", f.iterations, "total split budget");
  add("min-child-count", f.min_child_count, "minimum rows per child");
  add("min-child-fraction", f.min_child_fraction, "minimum child share of the leaf");
  add("init", f.init, "stump | proxy")->check(CLI::IsMember({"stump", "proxy"}));
  add("proxy-depth", f.proxy_depth, "depth of the proxy group tree (init proxy)");
  add("seed", f.seed, "seed")->envname("ALPHATREE_SEED");
}

void CheckConflicts(const TrainFlags& f) {
  const std::map<std::string, std::vector<std::string>> owners = {
      {"beta", {"cvar"}},       {"risk-threshold", {"cvar"}}, {"outer-rounds", {"cvar", "sp"}},
      {"epsilon", {"eoo", "sp"}}, {"K", {"eoo"}},           {"eta", {"eoo"}},
      {"direction", {"sp"}}};
  for (const auto& [flag, strategies] : owners) {
    if (!f.Given(flag)) continue;
    if (std::find(strategies.begin(), strategies.end(), f.strategy) == strategies.end()) {
      throw ConfigError("conflicting flags: --" + flag + " does not apply to --strategy " +
                        f.strategy);
    }
  }
  if (f.Given("proxy-depth") && f.init != "proxy") {
    throw ConfigError("conflicting flags: --proxy-depth needs --init proxy");
  }
}

StrategySpec MakeSpec(const TrainFlags& f) {
  StrategySpec spec;
  spec.kind = f.strategy == "cvar"  ? StrategyKind::kCvar
              : f.strategy == "eoo" ? StrategyKind::kEoo
                                    : StrategyKind::kSp;
  spec.beta = f.beta;
  spec.risk_threshold = f.risk_threshold;
  spec.outer_rounds = f.outer_rounds;
  spec.epsilon = f.epsilon;
  spec.K = f.K;
  spec.direction = f.direction == "up" ? SpDirection::kUp : SpDirection::kDown;
  spec.induction.max_iterations = f.iterations;
  spec.induction.scoring = ParseScoring(f.scoring);
  spec.induction.min_child_count = f.min_child_count;
  spec.induction.min_child_fraction = f.min_child_fraction;
  spec.Validate();
  return spec;
}

std::string ConfigText(const TrainFlags& f, const SchemaConfig& schema) {
  std::ostringstream text;
  text << "strategy=" << f.strategy << ";beta=" << Num(f.beta)
       << ";risk_threshold=" << Num(f.risk_threshold) << ";outer_rounds=" << f.outer_rounds
       << ";epsilon=" << Num(f.epsilon) << ";K=" << Num(f.K) << ";eta=" << f.eta
       << ";direction=" << f.direction << ";scoring=" << f.scoring
       << ";iterations=" << f.iterations << ";min_child_count=" << f.min_child_count
       << ";min_child_fraction=" << Num(f.min_child_fraction) << ";init=" << f.init
       << ";proxy_depth=" << f.proxy_depth << ";seed=" << f.seed << ";schema=" << schema.ToJson();
  return text.str();
}

struct Trained {
  DriverResult result;
  ModelMeta meta;
};

Trained Train(const TrainFlags& f) {
  CheckConflicts(f);
  const StrategySpec spec = MakeSpec(f);
  const SchemaConfig schema = SchemaConfig::Load(f.schema);
  const Dataset dataset = LoadDataset(f.data, schema);

  AlphaTree initial = InitStump(dataset);
  std::optional<Grouping> schedule;
  if (f.init == "proxy") {
    const ProxyGroupTree proxy = ProxyGroupTree::Fit(dataset, f.proxy_depth, spec.induction);
    initial = proxy.InitTree();
    schedule = proxy.Assign(dataset);
  }

  Trained trained;
  trained.meta.clip_B = schema.clip_B;
  trained.meta.scoring = spec.induction.scoring;
  trained.meta.group_column = schema.group_column;
  trained.meta.strategy = f.strategy;
  trained.meta.config_digest = Fnv1aDigest(ConfigText(f, schema));
  trained.meta.schema = schema;

  switch (spec.kind) {
    case StrategyKind::kCvar:
      trained.result = RunCvar(dataset, spec, initial, schedule);
      break;
    case StrategyKind::kSp:
      trained.result = RunSp(dataset, spec, initial, schedule);
      break;
    case StrategyKind::kEoo: {
      std::string source = f.eta;
      if (source == "auto") source = dataset.target() ? "column" : "gaussian";
      std::optional<TargetPosterior> eta;
      if (source == "column") {
        if (!dataset.target()) {
          throw ConfigError("--eta column needs a target_column in the schema");
        }
        eta.emplace(*dataset.target());
      } else if (source == "gaussian") {
        trained.meta.gaussian = GaussianPlugin::Fit(dataset);
        eta.emplace(trained.meta.gaussian->Posterior(dataset));
      } else {
        eta.emplace(LabelPlugin(dataset));
      }
      trained.result = RunEoo(dataset, spec, initial, *eta, schedule);
      break;
    }
  }
  trained.meta.iterations = trained.result.splits;
  return trained;
}

std::string TraceCsv(const RunTrace& trace) {
  std::ostringstream text;
  trace.WriteCsv(text);
  return text.str();
}

Model LoadModelWithSchema(const std::string& model_path, const std::string& schema_path,
                          SchemaConfig& schema) {
  Model model = LoadModel(model_path);
  if (!schema_path.empty()) {
    schema = SchemaConfig::Load(schema_path);
  } else if (model.meta.schema) {
    schema = *model.meta.schema;
  } else {
    throw ConfigError("model file has no schema; pass --schema");
  }
  schema.clip_B = model.meta.clip_B;
  return model;
}

using ForcedOutcome = std::function<std::optional<bool>(const SplitTest&)>;

void PrintNode(const AlphaTree& tree, int index, int depth, const ForcedOutcome& forced,
               std::ostream& out) {
  const std::string indent(2 * depth, ' ');
  if (const auto* leaf = std::get_if<Leaf>(&tree.node(index))) {
    out << indent << "leaf " << leaf->id << ": alpha=" << Num(leaf->alpha)
        << " mass=" << Num(leaf->mass) << " " << ClassifyAlpha(leaf->alpha) << "\n";
    return;
  }
  const auto& internal = std::get<InternalNode>(tree.node(index));
  if (const std::optional<bool> passes = forced(internal.test)) {
    PrintNode(tree, *passes ? internal.left : internal.right, depth, forced, out);
    return;
  }
  out << indent << "if " << internal.test.Describe() << "\n";
  PrintNode(tree, internal.left, depth + 1, forced, out);
  out << indent << "else\n";
  PrintNode(tree, internal.right, depth + 1, forced, out);
}

int Inspect(const std::string& model_path, std::ostream& out) {
  const Model model = LoadModel(model_path);
  const AlphaTree& tree = model.tree;
  const ModelMeta& meta = model.meta;
  out << "strategy: " << meta.strategy << "\n"
      << "scoring: " << ScoringName(meta.scoring) << "\n"
      << "clip_B: " << Num(meta.clip_B) << "\n"
      << "splits: " << meta.iterations << "\n"
      << "config_digest: " << meta.config_digest << "\n"
      << "leaves: " << tree.num_leaves() << "\n\n";

  std::vector<std::string> named;
  for (const TreeNode& node : tree.nodes()) {
    const auto* internal = std::get_if<InternalNode>(&node);
    if (internal == nullptr || internal->test.kind != SplitTest::Kind::kCategorical ||
        internal->test.feature != meta.group_column) {
      continue;
    }
    if (std::find(named.begin(), named.end(), internal->test.modality) == named.end()) {
      named.push_back(internal->test.modality);
    }
  }
  std::sort(named.begin(), named.end());
  if (named.empty()) {
    out << "tree (no split on " << meta.group_column << "):\n";
    PrintTree(tree, out);
    return 0;
  }
  auto for_group = [&](const std::optional<std::string>& group) -> ForcedOutcome {
    return [&meta, group](const SplitTest& test) -> std::optional<bool> {
      if (test.kind != SplitTest::Kind::kCategorical || test.feature != meta.group_column) {
        return std::nullopt;
      }
      return group.has_value() && *group == test.modality;
    };
  };
  for (const std::string& group : named) {
    out << meta.group_column << " = " << group << ":\n";
    PrintNode(tree, tree.root(), 1, for_group(group), out);
  }
  out << meta.group_column << " = any other value:\n";
  PrintNode(tree, tree.root(), 1, for_group(std::nullopt), out);
  return 0;
}

}  // namespace

std::string ClassifyAlpha(double alpha) {
  if (std::abs(alpha - 1.0) <= 1e-12) return "identity (α=1)";
  if (alpha > 1.0) return "sharpening";
  if (alpha > 0.0) return "dampening";
  if (alpha == 0.0) return "flattening (α=0)";
  return "polarity-reversing";
}

void PrintTree(const AlphaTree& tree, std::ostream& out) {
  PrintNode(tree, tree.root(), 0, [](const SplitTest&) { return std::optional<bool>(); }, out);
}

int RunMain(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Fairness post-processing with alpha-trees", "alphatree");
  app.require_subcommand(1);

  TrainFlags train_flags;
  CLI::App* train = app.add_subcommand("train", "grow an alpha-tree and save the model");
  AddTrainFlags(train, train_flags, true);

  TrainFlags trace_flags;
  CLI::App* trace = app.add_subcommand("trace", "rerun training and emit the trace table");
  AddTrainFlags(trace, trace_flags, false);

  std::string model_path, data_path, schema_path, out_path;
  double beta = 0.9;
  CLI::App* apply = app.add_subcommand("apply", "score a dataset with a model");
  apply->add_option("--model", model_path, "model file")->required();
  apply->add_option("--data", data_path, "dataset CSV")->required();
  apply->add_option("--schema", schema_path, "schema JSON (defaults to the model's)");
  apply->add_option("--out", out_path, "scored CSV (stdout when omitted)");

  CLI::App* eval = app.add_subcommand("eval", "report metrics of a model on a dataset");
  eval->add_option("--model", model_path, "model file")->required();
  eval->add_option("--data", data_path, "dataset CSV")->required();
  eval->add_option("--schema", schema_path, "schema JSON (defaults to the model's)");
  eval->add_option("--beta", beta, "CVaR level");
  eval->add_option("--out", out_path, "report CSV (stdout when omitted)");

  CLI::App* inspect = app.add_subcommand("inspect", "print the tree per sensitive group");
  inspect->add_option("--model", model_path, "model file")->required();

  SplitPlan plan;
  CLI::App* split = app.add_subcommand("split", "write a cross-validation split plan");
  split->add_option("--data", data_path, "dataset CSV")->required();
  split->add_option("--schema", schema_path, "schema JSON")->required();
  split->add_option("--folds", plan.folds, "number of folds");
  split->add_option("--seed", plan.seed, "seed")->envname("ALPHATREE_SEED");
  split->add_option("--out", out_path, "assignment CSV (stdout when omitted)");

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("alphatree");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& arg : storage) argv.push_back(arg.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (train->parsed()) {
      const Trained trained = Train(train_flags);
      SaveModel(trained.result.tree, trained.meta, train_flags.out);
      if (!train_flags.trace.empty()) {
        WriteFile(train_flags.trace, TraceCsv(trained.result.trace));
      }
      out << "splits: " << trained.result.splits << "\n"
          << "leaves: " << trained.result.tree.num_leaves() << "\n"
          << "stop: " << trained.result.stop_reason << "\n";
    } else if (trace->parsed()) {
      const Trained trained = Train(trace_flags);
      Emit(trace_flags.out, TraceCsv(trained.result.trace), out);
    } else if (apply->parsed()) {
      SchemaConfig schema;
      const Model model = LoadModelWithSchema(model_path, schema_path, schema);
      const Dataset dataset = LoadDataset(data_path, schema);
      const std::vector<int> leaves = dataset.RouteRows(model.tree);
      const Eigen::ArrayXd q = dataset.WrappedScores(model.tree);
      std::ostringstream text;
      text << "row,q_unfair,q_fair,leaf,alpha\n";
      for (int row = 0; row < dataset.num_rows(); ++row) {
        text << row << ',' << Num(dataset.scores()(row)) << ',' << Num(q(row)) << ','
             << leaves[row] << ',' << Num(model.tree.leaf(leaves[row]).alpha) << '\n';
      }
      Emit(out_path, text.str(), out);
    } else if (eval->parsed()) {
      if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("--beta must lie in (0,1)");
      SchemaConfig schema;
      const Model model = LoadModelWithSchema(model_path, schema_path, schema);
      const Dataset dataset = LoadDataset(data_path, schema);
      const MetricReport report = Evaluate(dataset, model.tree, beta);
      for (const std::string& group : report.eoo_excluded) {
        err << "warning: group '" << group << "' has no positives; left out of eoo_gap\n";
      }
      std::ostringstream text;
      text << "metric,value\n"
           << "cvar," << Num(report.cvar) << "\n"
           << "eoo_gap," << Num(report.eoo_gap) << "\n"
           << "sp_gap," << Num(report.sp_gap) << "\n"
           << "md," << Num(report.md) << "\n"
           << "zero_one_error," << Num(report.zero_one_error) << "\n"
           << "auc," << Num(report.auc) << "\n"
           << "logloss," << Num(report.logloss) << "\n"
           << "empirical_kl," << Num(report.empirical_kl) << "\n"
           << "s1_applicable," << (S1Applicable(model.tree, model.meta.clip_B) ? 1 : 0) << "\n"
           << "s2_applicable," << (S2Applicable(dataset, model.tree) ? 1 : 0) << "\n";
      Emit(out_path, text.str(), out);
    } else if (inspect->parsed()) {
      return Inspect(model_path, out);
    } else if (split->parsed()) {
      if (plan.folds < 2) throw ConfigError("--folds must be >= 2");
      plan.test = 1.0 / plan.folds;
      plan.blackbox = (1.0 - plan.test) / 2.0;
      plan.postprocess = 1.0 - plan.test - plan.blackbox;
      const Dataset dataset = LoadDataset(data_path, SchemaConfig::Load(schema_path));
      const FoldAssignment assignment = MakeSplitPlan(dataset, plan);
      for (const std::string& warning : assignment.warnings) {
        err << "warning: " << warning << "\n";
      }
      std::ostringstream text;
      WriteSplitPlan(assignment, text);
      Emit(out_path, text.str(), out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace alphatree
