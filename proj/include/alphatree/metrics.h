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

// Fairness and accuracy metrics of a wrapped posterior, its divergence from
// the black-box, and closed-form bounds on that divergence.
//
// Group metrics use the sensitive grouping stored in the dataset.

#ifndef ALPHATREE_METRICS_H_
#define ALPHATREE_METRICS_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "alphatree/alpha_tree.h"
#include "alphatree/dataset.h"
#include "alphatree/measures.h"

namespace alphatree {

struct GapResult {
  double value = 0.0;
  // Groups left out because they have no positive rows.
  std::vector<std::string> excluded;
};

struct MetricReport {
  double cvar = 0.0;
  double eoo_gap = 0.0;
  double sp_gap = 0.0;
  double md = 0.0;
  double zero_one_error = 0.0;
  double auc = 0.0;
  double logloss = 0.0;
  double empirical_kl = 0.0;
  std::vector<std::string> eoo_excluded;
};

struct TaylorBound {
  double value = 0.0;
  // Bound on the terms k > K; infinite unless f <= 1 on every row.
  double tail_bound = 0.0;
};

// max - min advantage rate over groups with positives.
GapResult EooGap(const Dataset& dataset, const AlphaTree& tree);
// max - min mean wrapped posterior over groups.
double SpGap(const Dataset& dataset, const AlphaTree& tree);
double CvarMetric(const Dataset& dataset, const AlphaTree& tree, double beta);

// sum_i w_i |1{y_i = +1} - q_fair_i|.
double MeanDifference(const Dataset& dataset, const AlphaTree& tree);
// Weighted error of predicting +1 iff q_fair > 1/2.
double ZeroOneError(const Dataset& dataset, const AlphaTree& tree);

// Weighted Mann-Whitney AUC of dataset-aligned scores, ties count 1/2.
// Throws DomainError when a class is missing.
double Auc(const Dataset& dataset, const Eigen::ArrayXd& scores);

// sum_i w_i KL(Bernoulli(q_u_i) || Bernoulli(q_f_i)) under the view.
double EmpiricalKl(const View& view, const Eigen::ArrayXd& q_unfair,
                   const Eigen::ArrayXd& q_fair);

// pi^2 / (6 (2 + e^B + e^-B)).
double KlBoundS1(double clip_half_width);
// B <= 3 and |alpha - 1| <= 1/B on every leaf.
bool S1Applicable(const AlphaTree& tree, double clip_half_width);
// pi^2 / 24.
double KlBoundS2();
// |logit(q_u) (1 - alpha(x))| <= 1 on every row.
bool S2Applicable(const Dataset& dataset, const AlphaTree& tree);

// sum_i w_i sum_{k=2..K} q_u (1 - q_u) f^k / (k (k - 1)), f = |logit(q_u)(1 - alpha)|.
TaylorBound KlTaylorBound(const View& view, const Eigen::ArrayXd& q_unfair,
                          const Eigen::ArrayXd& alphas, int K);

// auc is NaN when a class is missing.
MetricReport Evaluate(const Dataset& dataset, const AlphaTree& tree, double beta);

}  // namespace alphatree

#endif  // ALPHATREE_METRICS_H_
