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

#include "alphatree/dataset.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "alphatree/errors.h"

namespace alphatree {
namespace {

// Sorted distinct values and the code of every input value.
std::pair<std::vector<std::string>, std::vector<int>> Encode(
    const std::vector<std::string>& values) {
  std::vector<std::string> domain(values);
  std::sort(domain.begin(), domain.end());
  domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
  std::vector<int> codes;
  codes.reserve(values.size());
  for (const std::string& value : values) {
    codes.push_back(static_cast<int>(
        std::lower_bound(domain.begin(), domain.end(), value) - domain.begin()));
  }
  return {std::move(domain), std::move(codes)};
}

Eigen::ArrayXd ToArray(const std::vector<double>& values) {
  return Eigen::Map<const Eigen::ArrayXd>(values.data(),
                                          static_cast<Eigen::Index>(values.size()));
}

// A split test resolved against the dataset columns.
struct ResolvedTest {
  const Eigen::ArrayXd* numeric = nullptr;
  const std::vector<int>* codes = nullptr;
  double threshold = 0.0;
  int code = -1;  // -1 never matches

  bool Passes(int row) const {
    if (numeric != nullptr) return (*numeric)(row) <= threshold;
    return (*codes)[row] == code;
  }
};

}  // namespace

int Grouping::Code(std::string_view name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

double RowRecord::Numeric(const std::string& feature) const {
  const int index = dataset_->FeatureIndex(feature);
  if (index < 0 || dataset_->column(index).spec.kind != FeatureKind::kNumeric) {
    throw SchemaError("dataset has no numeric feature '" + feature + "'");
  }
  return dataset_->column(index).numeric(row_);
}

std::string_view RowRecord::Categorical(const std::string& feature) const {
  const int index = dataset_->FeatureIndex(feature);
  if (index >= 0) {
    const FeatureColumn& column = dataset_->column(index);
    if (column.spec.kind != FeatureKind::kCategorical) {
      throw SchemaError("feature '" + feature + "' is not categorical");
    }
    return column.domain[column.codes[row_]];
  }
  if (feature == dataset_->group_column()) {
    const Grouping& groups = dataset_->groups();
    return groups.names[groups.codes[row_]];
  }
  throw SchemaError("dataset has no categorical feature '" + feature + "'");
}

int Dataset::FeatureIndex(const std::string& name) const {
  const auto it = feature_index_.find(name);
  return it == feature_index_.end() ? -1 : it->second;
}

std::vector<int> Dataset::RouteRows(const AlphaTree& tree) const {
  std::vector<ResolvedTest> resolved(tree.num_nodes());
  for (int i = 0; i < tree.num_nodes(); ++i) {
    const auto* internal = std::get_if<InternalNode>(&tree.node(i));
    if (internal == nullptr) continue;
    const SplitTest& test = internal->test;
    ResolvedTest& out = resolved[i];
    const int index = FeatureIndex(test.feature);
    if (test.kind == SplitTest::Kind::kNumeric) {
      if (index < 0 || columns_[index].spec.kind != FeatureKind::kNumeric) {
        throw SchemaError("tree tests numeric feature '" + test.feature +
                          "' which the dataset does not provide");
      }
      out.numeric = &columns_[index].numeric;
      out.threshold = test.threshold;
    } else if (index >= 0) {
      const FeatureColumn& column = columns_[index];
      if (column.spec.kind != FeatureKind::kCategorical) {
        throw SchemaError("feature '" + test.feature + "' is not categorical");
      }
      out.codes = &column.codes;
      const auto it = std::lower_bound(column.domain.begin(), column.domain.end(),
                                       test.modality);
      if (it != column.domain.end() && *it == test.modality) {
        out.code = static_cast<int>(it - column.domain.begin());
      }
    } else if (test.feature == group_column_) {
      out.codes = &groups_.codes;
      out.code = groups_.Code(test.modality);
    } else {
      throw SchemaError("tree tests categorical feature '" + test.feature +
                        "' which the dataset does not provide");
    }
  }

  std::vector<int> leaves(num_rows());
  for (int row = 0; row < num_rows(); ++row) {
    int index = tree.root();
    while (const auto* internal = std::get_if<InternalNode>(&tree.node(index))) {
      index = resolved[index].Passes(row) ? internal->left : internal->right;
    }
    leaves[row] = std::get<Leaf>(tree.node(index)).id;
  }
  return leaves;
}

Eigen::ArrayXd Dataset::AlphasFor(const AlphaTree& tree) const {
  const std::vector<int> leaves = RouteRows(tree);
  Eigen::ArrayXd alphas(num_rows());
  for (int row = 0; row < num_rows(); ++row) alphas(row) = tree.leaf(leaves[row]).alpha;
  return alphas;
}

Eigen::ArrayXd Dataset::WrappedScores(const AlphaTree& tree) const {
  return ApplyAlpha(scores_, AlphasFor(tree));
}

Dataset Dataset::Subset(const std::vector<int>& rows) const {
  Dataset out;
  out.columns_.reserve(columns_.size());
  const auto n = static_cast<Eigen::Index>(rows.size());
  for (const FeatureColumn& column : columns_) {
    FeatureColumn sub;
    sub.spec = column.spec;
    sub.domain = column.domain;
    if (column.spec.kind == FeatureKind::kNumeric) {
      sub.numeric.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) sub.numeric(i) = column.numeric(rows[i]);
    } else {
      for (int row : rows) sub.codes.push_back(column.codes[row]);
    }
    out.columns_.push_back(std::move(sub));
  }
  out.feature_index_ = feature_index_;
  out.group_column_ = group_column_;
  out.groups_.names = groups_.names;
  out.labels_.resize(n);
  out.scores_.resize(n);
  out.weights_.resize(n);
  if (target_) out.target_ = Eigen::ArrayXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int row = rows[i];
    out.groups_.codes.push_back(groups_.codes.at(row));
    out.labels_(i) = labels_(row);
    out.scores_(i) = scores_(row);
    out.weights_(i) = weights_(row);
    if (target_) (*out.target_)(i) = (*target_)(row);
  }
  out.clip_ = clip_;
  return out;
}

DatasetBuilder::DatasetBuilder(std::vector<FeatureSpec> features,
                               std::string group_column, ClipBound clip)
    : specs_(std::move(features)),
      group_column_(std::move(group_column)),
      clip_(clip),
      numeric_(specs_.size()),
      categorical_(specs_.size()) {
  std::map<std::string, int> seen;
  for (const FeatureSpec& spec : specs_) {
    if (!seen.emplace(spec.name, 0).second) {
      throw SchemaError("duplicate feature '" + spec.name + "'");
    }
  }
}

DatasetBuilder& DatasetBuilder::AddRow(const std::vector<MapRecord::Value>& features,
                                       int label, const std::string& group,
                                       double score, double weight,
                                       std::optional<double> target) {
  const std::string where = "row " + std::to_string(labels_.size() + 1);
  if (features.size() != specs_.size()) {
    throw SchemaError(where + ": expected " + std::to_string(specs_.size()) +
                      " features, got " + std::to_string(features.size()));
  }
  if (label != 1 && label != -1) {
    throw SchemaError(where + ": label must be +1 or -1");
  }
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
    throw DomainError(where + ": score must lie in [0,1]");
  }
  if (!std::isfinite(weight) || weight < 0.0) {
    throw DomainError(where + ": weight must be nonnegative");
  }
  if (labels_.empty()) {
    has_target_ = target.has_value();
  } else if (has_target_ != target.has_value()) {
    throw SchemaError(where + ": target column must be given for all rows or none");
  }
  if (target && (!std::isfinite(*target) || *target < 0.0 || *target > 1.0)) {
    throw DomainError(where + ": target posterior must lie in [0,1]");
  }
  for (size_t j = 0; j < specs_.size(); ++j) {
    if (specs_[j].kind == FeatureKind::kNumeric) {
      const double* value = std::get_if<double>(&features[j]);
      if (value == nullptr || !std::isfinite(*value)) {
        throw SchemaError(where + ": feature '" + specs_[j].name +
                          "' needs a finite numeric value");
      }
      numeric_[j].push_back(*value);
    } else {
      const std::string* value = std::get_if<std::string>(&features[j]);
      if (value == nullptr) {
        throw SchemaError(where + ": feature '" + specs_[j].name +
                          "' needs a categorical value");
      }
      categorical_[j].push_back(*value);
    }
  }
  labels_.push_back(label);
  groups_.push_back(group);
  scores_.push_back(ClipScore(score, clip_));
  weights_.push_back(weight);
  if (target) target_.push_back(*target);
  return *this;
}

Dataset DatasetBuilder::Build() && {
  if (labels_.empty()) throw EmptyMeasureError("dataset has no rows");
  Dataset out;
  for (size_t j = 0; j < specs_.size(); ++j) {
    FeatureColumn column;
    column.spec = specs_[j];
    if (specs_[j].kind == FeatureKind::kNumeric) {
      column.numeric = ToArray(numeric_[j]);
    } else {
      std::tie(column.domain, column.codes) = Encode(categorical_[j]);
    }
    out.feature_index_.emplace(specs_[j].name, static_cast<int>(j));
    out.columns_.push_back(std::move(column));
  }
  out.group_column_ = group_column_;
  std::tie(out.groups_.names, out.groups_.codes) = Encode(groups_);
  out.labels_ = ToArray(labels_);
  out.scores_ = ToArray(scores_);
  out.weights_ = ToArray(weights_);
  if (!(out.weights_.sum() > 0.0)) throw DomainError("row weights sum to zero");
  if (has_target_) out.target_ = ToArray(target_);
  out.clip_ = clip_;
  return out;
}

}  // namespace alphatree
