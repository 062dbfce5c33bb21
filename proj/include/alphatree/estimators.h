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

// Target-posterior estimators and group-structure helpers.

#ifndef ALPHATREE_ESTIMATORS_H_
#define ALPHATREE_ESTIMATORS_H_

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alphatree/alpha_tree.h"
#include "alphatree/boosting.h"
#include "alphatree/dataset.h"
#include "alphatree/measures.h"

namespace alphatree {

// eta_i = 1 on positive rows, 0 otherwise.
TargetPosterior LabelPlugin(const Dataset& dataset);

// Naive Bayes posterior: per-class diagonal Gaussians on numeric features and
// add-one smoothed frequencies on categorical ones, combined with the class
// priors in log space.
class GaussianPlugin {
 public:
  struct NumericParams {
    std::string feature;
    double mean[2] = {0.0, 0.0};      // [negative, positive]
    double variance[2] = {1.0, 1.0};
  };
  struct CategoricalParams {
    std::string feature;
    std::vector<std::string> domain;
    std::vector<double> counts[2];    // weighted counts per modality
    double totals[2] = {0.0, 0.0};
  };

  // Fits on `features` (every dataset feature when empty). Throws
  // DomainError when one class is absent.
  static GaussianPlugin Fit(const Dataset& dataset,
                            const std::vector<std::string>& features = {});
  static GaussianPlugin FromParams(double prior_positive, std::vector<NumericParams> numeric,
                                   std::vector<CategoricalParams> categorical);

  // P(Y = +1 | x), strictly inside (0,1).
  double Evaluate(const FeatureRecord& record) const;
  Eigen::ArrayXd EvaluateAll(const Dataset& dataset) const;
  TargetPosterior Posterior(const Dataset& dataset) const;

  double prior_positive() const { return prior_positive_; }
  const std::vector<NumericParams>& numeric() const { return numeric_; }
  const std::vector<CategoricalParams>& categorical() const { return categorical_; }

 private:
  double prior_positive_ = 0.5;
  std::vector<NumericParams> numeric_;
  std::vector<CategoricalParams> categorical_;
};

// Identity tree routing by sensitive modality: a chain of "group == s" tests
// over the sorted modalities, all leaves alpha = 1.
AlphaTree InitStump(const Dataset& dataset);

// Classification tree predicting the sensitive modality from the other
// features. Its leaves define proxy groups.
class ProxyGroupTree {
 public:
  // Grown greedily by multiclass entropy impurity with the size rules of
  // `config`, depth <= max_depth. Throws DomainError with a single modality.
  static ProxyGroupTree Fit(const Dataset& dataset, int max_depth = 8,
                            const InductionConfig& config = {});

  const AlphaTree& tree() const { return tree_; }
  // Majority modality of each leaf.
  const std::map<int, std::string>& leaf_groups() const { return leaf_groups_; }

  std::string GroupOf(const FeatureRecord& record) const;
  // Proxy grouping of every dataset row (names sorted).
  Grouping Assign(const Dataset& dataset) const;
  // Same structure as the proxy tree with alpha = 1 leaves.
  AlphaTree InitTree() const;

 private:
  AlphaTree tree_;
  std::map<int, std::string> leaf_groups_;
};

}  // namespace alphatree

#endif  // ALPHATREE_ESTIMATORS_H_
