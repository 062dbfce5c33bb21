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

#include "alphatree/measures.h"

#include "alphatree/errors.h"

namespace alphatree {

TargetPosterior::TargetPosterior(Eigen::ArrayXd values) : values_(std::move(values)) {
  if (!values_.allFinite() || (values_ < 0.0).any() || (values_ > 1.0).any()) {
    throw DomainError("target posterior values must lie in [0,1]");
  }
}

View::View(const Dataset& base, std::vector<int> rows)
    : View(base, rows, [&] {
        Eigen::ArrayXd raw(rows.size());
        for (size_t i = 0; i < rows.size(); ++i) raw(i) = base.weights()(rows[i]);
        return raw;
      }()) {}

View::View(const Dataset& base, std::vector<int> rows, const Eigen::ArrayXd& raw_weights)
    : base_(&base), rows_(std::move(rows)) {
  if (rows_.empty()) throw EmptyMeasureError("view has no rows");
  if (raw_weights.size() != static_cast<Eigen::Index>(rows_.size())) {
    throw DomainError("view weights do not match its rows");
  }
  const double total = raw_weights.sum();
  if (!(total > 0.0)) throw EmptyMeasureError("view rows carry no mass");
  weights_ = raw_weights / total;
}

View View::All(const Dataset& base) {
  std::vector<int> rows(base.num_rows());
  for (int i = 0; i < base.num_rows(); ++i) rows[i] = i;
  return View(base, std::move(rows));
}

Eigen::ArrayXd View::Gather(const Eigen::ArrayXd& column) const {
  Eigen::ArrayXd out(size());
  for (int i = 0; i < size(); ++i) out(i) = column(rows_[i]);
  return out;
}

double View::Expectation(const Eigen::ArrayXd& column) const {
  double total = 0.0;
  for (int i = 0; i < size(); ++i) total += weights_(i) * column(rows_[i]);
  return total;
}

View ConditionOnGroup(const Dataset& dataset, const Grouping& grouping,
                      const std::string& modality) {
  const int code = grouping.Code(modality);
  if (code < 0) throw EmptyMeasureError("unknown group '" + modality + "'");
  std::vector<int> rows;
  for (int row = 0; row < dataset.num_rows(); ++row) {
    if (grouping.codes[row] == code) rows.push_back(row);
  }
  if (rows.empty()) throw EmptyMeasureError("group '" + modality + "' is empty");
  return View(dataset, std::move(rows));
}

View ConditionOnGroup(const Dataset& dataset, const std::string& modality) {
  return ConditionOnGroup(dataset, dataset.groups(), modality);
}

View ConditionPositive(const Dataset& dataset, const Grouping& grouping,
                       const std::string& modality) {
  const int code = grouping.Code(modality);
  if (code < 0) throw EmptyMeasureError("unknown group '" + modality + "'");
  std::vector<int> rows;
  for (int row = 0; row < dataset.num_rows(); ++row) {
    if (grouping.codes[row] == code && dataset.labels()(row) > 0) rows.push_back(row);
  }
  if (rows.empty()) {
    throw EmptyMeasureError("group '" + modality + "' has no positive rows");
  }
  return View(dataset, std::move(rows));
}

View ConditionPositive(const Dataset& dataset, const std::string& modality) {
  return ConditionPositive(dataset, dataset.groups(), modality);
}

View ConditionOnLeaf(const View& view, const std::vector<int>& row_leaves, int leaf_id) {
  std::vector<int> rows;
  std::vector<double> raw;
  for (int i = 0; i < view.size(); ++i) {
    const int row = view.rows()[i];
    if (row_leaves[row] == leaf_id) {
      rows.push_back(row);
      raw.push_back(view.weights()(i));
    }
  }
  if (rows.empty()) {
    throw EmptyMeasureError("leaf " + std::to_string(leaf_id) + " is empty under the view");
  }
  return View(view.base(), std::move(rows),
              Eigen::Map<const Eigen::ArrayXd>(raw.data(), raw.size()));
}

View ConditionOnLeaf(const View& view, const AlphaTree& tree, int leaf_id) {
  if (!tree.HasLeaf(leaf_id)) {
    throw EmptyMeasureError("tree has no leaf " + std::to_string(leaf_id));
  }
  return ConditionOnLeaf(view, view.base().RouteRows(tree), leaf_id);
}

std::map<int, double> LeafWeights(const View& view, const AlphaTree& tree) {
  std::map<int, double> weights;
  for (int id : tree.LeafIds()) weights[id] = 0.0;
  const std::vector<int> leaves = view.base().RouteRows(tree);
  for (int i = 0; i < view.size(); ++i) weights[leaves[view.rows()[i]]] += view.weights()(i);
  return weights;
}

double EmpiricalRisk(const View& view, const Eigen::ArrayXd& q,
                     const TargetPosterior& target) {
  double risk = 0.0;
  for (int i = 0; i < view.size(); ++i) {
    const int row = view.rows()[i];
    const double qi = q(row);
    const double eta = target(row);
    double loss = 0.0;
    if (eta > 0.0) {
      if (qi <= 0.0) throw DomainError("infinite risk: q = 0 on positive target mass");
      loss -= eta * std::log(qi);
    }
    if (eta < 1.0) {
      if (qi >= 1.0) throw DomainError("infinite risk: q = 1 on negative target mass");
      loss -= (1.0 - eta) * std::log1p(-qi);
    }
    risk += view.weights()(i) * loss;
  }
  return risk;
}

double MeanEntropy(const View& view, const TargetPosterior& target) {
  double total = 0.0;
  for (int i = 0; i < view.size(); ++i) {
    total += view.weights()(i) * BinaryEntropy(target(view.rows()[i]));
  }
  return total;
}

}  // namespace alphatree
