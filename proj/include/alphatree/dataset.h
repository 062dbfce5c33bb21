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

// In-memory tabular dataset: features, +-1 labels, sensitive group, clipped
// black-box score, optional target posterior and row weights. Immutable once
// built.

#ifndef ALPHATREE_DATASET_H_
#define ALPHATREE_DATASET_H_

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "alphatree/alpha_tree.h"
#include "alphatree/wrapping.h"

namespace alphatree {

enum class FeatureKind { kNumeric, kCategorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

// Partition of the rows into named groups. Codes index `names`.
struct Grouping {
  std::vector<std::string> names;
  std::vector<int> codes;

  int num_groups() const { return static_cast<int>(names.size()); }
  // -1 when the modality is unknown.
  int Code(std::string_view name) const;
};

struct FeatureColumn {
  FeatureSpec spec;
  Eigen::ArrayXd numeric;            // kNumeric only
  std::vector<int> codes;            // kCategorical only, index into domain
  std::vector<std::string> domain;   // sorted modalities
};

class Dataset;

// One row seen through the FeatureRecord interface. The sensitive column is
// exposed as a categorical feature under its own name.
class RowRecord : public FeatureRecord {
 public:
  RowRecord(const Dataset& dataset, int row) : dataset_(&dataset), row_(row) {}
  double Numeric(const std::string& feature) const override;
  std::string_view Categorical(const std::string& feature) const override;

 private:
  const Dataset* dataset_;
  int row_;
};

class Dataset {
 public:
  int num_rows() const { return static_cast<int>(labels_.size()); }
  int num_features() const { return static_cast<int>(columns_.size()); }
  const FeatureColumn& column(int feature) const { return columns_.at(feature); }
  // -1 when absent.
  int FeatureIndex(const std::string& name) const;

  const std::string& group_column() const { return group_column_; }
  const Grouping& groups() const { return groups_; }
  // +1 / -1 stored as doubles.
  const Eigen::ArrayXd& labels() const { return labels_; }
  // Black-box scores after clipping to the interval of clip().
  const Eigen::ArrayXd& scores() const { return scores_; }
  const std::optional<Eigen::ArrayXd>& target() const { return target_; }
  const Eigen::ArrayXd& weights() const { return weights_; }
  const ClipBound& clip() const { return clip_; }

  RowRecord Row(int row) const { return RowRecord(*this, row); }

  // Leaf id reached by every row (tests are resolved against the columns
  // once, then rows are routed without name lookups).
  std::vector<int> RouteRows(const AlphaTree& tree) const;
  Eigen::ArrayXd AlphasFor(const AlphaTree& tree) const;
  // Wrapped posterior q_fair of every row.
  Eigen::ArrayXd WrappedScores(const AlphaTree& tree) const;

  // New dataset restricted to the given rows (in that order).
  Dataset Subset(const std::vector<int>& rows) const;

 private:
  friend class DatasetBuilder;
  friend class RowRecord;

  std::vector<FeatureColumn> columns_;
  std::unordered_map<std::string, int> feature_index_;
  std::string group_column_;
  Grouping groups_;
  Eigen::ArrayXd labels_;
  Eigen::ArrayXd scores_;
  std::optional<Eigen::ArrayXd> target_;
  Eigen::ArrayXd weights_;
  ClipBound clip_{1.0};
};

// Row-by-row construction with validation. Scores are clipped on insertion.
class DatasetBuilder {
 public:
  DatasetBuilder(std::vector<FeatureSpec> features, std::string group_column,
                 ClipBound clip);

  // `features` follows the order given at construction; numeric features take
  // a double, categorical ones a string. Throws SchemaError / DomainError.
  DatasetBuilder& AddRow(const std::vector<MapRecord::Value>& features, int label,
                         const std::string& group, double score, double weight = 1.0,
                         std::optional<double> target = std::nullopt);

  Dataset Build() &&;

 private:
  std::vector<FeatureSpec> specs_;
  std::string group_column_;
  ClipBound clip_;
  std::vector<std::vector<double>> numeric_;
  std::vector<std::vector<std::string>> categorical_;
  std::vector<double> labels_;
  std::vector<std::string> groups_;
  std::vector<double> scores_;
  std::vector<double> weights_;
  std::vector<double> target_;
  bool has_target_ = false;
};

}  // namespace alphatree

#endif  // ALPHATREE_DATASET_H_
