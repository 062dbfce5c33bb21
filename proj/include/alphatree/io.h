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

// File formats: dataset schema (JSON), datasets (CSV with header), model
// files (versioned JSON) and cross-validation split plans.

#ifndef ALPHATREE_IO_H_
#define ALPHATREE_IO_H_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "alphatree/alpha_tree.h"
#include "alphatree/boosting.h"
#include "alphatree/dataset.h"
#include "alphatree/estimators.h"

namespace alphatree {

inline constexpr int kModelFormatVersion = 1;

struct SchemaConfig {
  std::string label_column;
  // Raw label text -> +1 / -1. Empty means {"1", "+1"} -> +1, {"0", "-1"} -> -1.
  std::map<std::string, int> label_map;
  std::string group_column;
  std::string score_column;
  std::optional<std::string> target_column;
  std::optional<std::string> weight_column;
  std::vector<FeatureSpec> features;
  double clip_B = 1.0;

  // Throws FormatError on malformed JSON, missing or unknown keys.
  static SchemaConfig FromJson(const std::string& text);
  static SchemaConfig Load(const std::string& path);
  std::string ToJson() const;

  int MapLabel(const std::string& raw) const;  // throws SchemaError
};

// Parses comma-separated text with a header row. Scores are clipped on
// ingest. Errors name the 1-based data row.
Dataset LoadDataset(std::istream& in, const SchemaConfig& schema);
Dataset LoadDataset(const std::string& path, const SchemaConfig& schema);

struct ModelMeta {
  double clip_B = 1.0;
  Scoring scoring = Scoring::kConservative;
  std::string group_column;
  std::string strategy;
  std::string config_digest;
  int iterations = 0;
  std::optional<GaussianPlugin> gaussian;
  // Schema used at training time; lets apply and eval parse data without one.
  std::optional<SchemaConfig> schema;
};

struct Model {
  AlphaTree tree;
  ModelMeta meta;
};

std::string ScoringName(Scoring scoring);
Scoring ParseScoring(const std::string& name);  // throws ConfigError

// Pretty-printed JSON; identical inputs give identical bytes. Throws
// DomainError on a non-finite alpha.
std::string ModelToJson(const AlphaTree& tree, const ModelMeta& meta);
// Throws FormatError on version mismatch, unknown keys or structural errors.
Model ModelFromJson(const std::string& text);
void SaveModel(const AlphaTree& tree, const ModelMeta& meta, const std::string& path);
Model LoadModel(const std::string& path);

// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string Fnv1aDigest(const std::string& text);

struct SplitPlan {
  std::uint64_t seed = 0;
  int folds = 5;
  double blackbox = 0.40;
  double postprocess = 0.40;
  double test = 0.20;

  // Throws ConfigError unless fractions sum to 1 and test = 1 / folds.
  void Validate() const;
};

enum class FoldRole { kBlackbox, kPostprocess, kTest };

struct FoldAssignment {
  std::vector<int> test_fold;                 // per row, in [0, folds)
  std::vector<std::vector<FoldRole>> roles;   // [fold][row]
  std::vector<std::string> warnings;
};

// Group-stratified 5-fold plan: each row is a test row in exactly one fold,
// the others split black-box / post-process by largest remainder.
FoldAssignment MakeSplitPlan(const Dataset& dataset, const SplitPlan& plan);
void WriteSplitPlan(const FoldAssignment& assignment, std::ostream& out);
std::string RoleName(FoldRole role);

}  // namespace alphatree

#endif  // ALPHATREE_IO_H_
