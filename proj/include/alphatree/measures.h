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

// Weighted conditional measures over a Dataset and the log-loss risk.
//
// A View is a nonempty subset of rows with weights renormalized to sum to 1;
// every expectation in the library is a weighted sum under some View.
// Posterior columns (scores, targets) are aligned with the dataset rows, and
// a View gathers the entries it needs.

#ifndef ALPHATREE_MEASURES_H_
#define ALPHATREE_MEASURES_H_

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alphatree/alpha_tree.h"
#include "alphatree/dataset.h"

namespace alphatree {

// Per-row target posterior eta_t, aligned with the dataset rows.
class TargetPosterior {
 public:
  // Throws DomainError unless every value is in [0,1].
  explicit TargetPosterior(Eigen::ArrayXd values);

  const Eigen::ArrayXd& values() const { return values_; }
  double operator()(int row) const { return values_(row); }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  Eigen::ArrayXd values_;
};

class View {
 public:
  // Rows weighted by the dataset weights. Throws EmptyMeasureError when the
  // rows are empty or carry no mass.
  View(const Dataset& base, std::vector<int> rows);
  // Rows weighted by `raw_weights` (one per row, renormalized).
  View(const Dataset& base, std::vector<int> rows, const Eigen::ArrayXd& raw_weights);

  static View All(const Dataset& base);

  const Dataset& base() const { return *base_; }
  const std::vector<int>& rows() const { return rows_; }
  const Eigen::ArrayXd& weights() const { return weights_; }
  int size() const { return static_cast<int>(rows_.size()); }

  // Entries of a dataset-aligned column at the view rows.
  Eigen::ArrayXd Gather(const Eigen::ArrayXd& column) const;
  // Weighted mean of a dataset-aligned column.
  double Expectation(const Eigen::ArrayXd& column) const;

 private:
  const Dataset* base_;
  std::vector<int> rows_;
  Eigen::ArrayXd weights_;
};

// M_s: rows of group `modality`. Throws EmptyMeasureError for unknown or
// empty groups.
View ConditionOnGroup(const Dataset& dataset, const std::string& modality);
View ConditionOnGroup(const Dataset& dataset, const Grouping& grouping,
                      const std::string& modality);

// P_s: positive rows (label +1) of group `modality`.
View ConditionPositive(const Dataset& dataset, const std::string& modality);
View ConditionPositive(const Dataset& dataset, const Grouping& grouping,
                       const std::string& modality);

// M_leaf: rows of `view` routed to `leaf_id`.
View ConditionOnLeaf(const View& view, const AlphaTree& tree, int leaf_id);
View ConditionOnLeaf(const View& view, const std::vector<int>& row_leaves, int leaf_id);

// Probability of each leaf under the view (every leaf of the tree appears;
// unreached leaves get 0).
std::map<int, double> LeafWeights(const View& view, const AlphaTree& tree);

// H(p) = -p log p - (1-p) log(1-p) with 0 log 0 = 0, natural log.
template <typename Scalar>
Scalar BinaryEntropy(Scalar p) {
  using std::log;
  Scalar h(0);
  if (p > Scalar(0)) h -= p * log(p);
  if (p < Scalar(1)) h -= (Scalar(1) - p) * log(Scalar(1) - p);
  return h;
}

// Log-loss risk of the dataset-aligned posterior `q` against `target` under
// the view: sum_i w_i [eta_i (-log q_i) + (1 - eta_i)(-log(1 - q_i))].
// Throws DomainError when a q_i in {0,1} faces opposing target mass.
double EmpiricalRisk(const View& view, const Eigen::ArrayXd& q,
                     const TargetPosterior& target);

// sum_i w_i H(eta_i): the minimum of EmpiricalRisk over q.
double MeanEntropy(const View& view, const TargetPosterior& target);

}  // namespace alphatree

#endif  // ALPHATREE_MEASURES_H_
