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

#include "alphatree/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "alphatree/errors.h"
#include "alphatree/estimators.h"
#include "alphatree/fairness.h"
#include "alphatree/wrapping.h"

namespace alphatree {

GapResult EooGap(const Dataset& dataset, const AlphaTree& tree) {
  GapResult result;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const std::string& group : dataset.groups().names) {
    double rate = 0.0;
    try {
      rate = AdvantageRate(dataset, tree, group);
    } catch (const EmptyMeasureError&) {
      result.excluded.push_back(group);
      continue;
    }
    lo = std::min(lo, rate);
    hi = std::max(hi, rate);
  }
  result.value = hi >= lo ? hi - lo : 0.0;
  return result;
}

double SpGap(const Dataset& dataset, const AlphaTree& tree) {
  const Eigen::ArrayXd q = dataset.WrappedScores(tree);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const std::string& group : dataset.groups().names) {
    const double mean = ConditionOnGroup(dataset, group).Expectation(q);
    lo = std::min(lo, mean);
    hi = std::max(hi, mean);
  }
  return hi - lo;
}

double CvarMetric(const Dataset& dataset, const AlphaTree& tree, double beta) {
  return CvarQuantile(SubgroupRisks(dataset, tree), beta).value;
}

double MeanDifference(const Dataset& dataset, const AlphaTree& tree) {
  const Eigen::ArrayXd q = dataset.WrappedScores(tree);
  const Eigen::ArrayXd y = (dataset.labels() > 0.0).cast<double>();
  return View::All(dataset).Expectation((y - q).abs());
}

double ZeroOneError(const Dataset& dataset, const AlphaTree& tree) {
  const Eigen::ArrayXd q = dataset.WrappedScores(tree);
  const Eigen::ArrayXd predicted = (q > 0.5).select(Eigen::ArrayXd::Ones(q.size()),
                                                    -Eigen::ArrayXd::Ones(q.size()));
  return View::All(dataset).Expectation((predicted != dataset.labels()).cast<double>());
}

double Auc(const Dataset& dataset, const Eigen::ArrayXd& scores) {
  const int n = dataset.num_rows();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return scores(a) < scores(b); });
  double negatives_below = 0.0;
  double concordant = 0.0;
  double total_pos = 0.0;
  double total_neg = 0.0;
  for (int start = 0; start < n;) {
    int end = start;
    double pos = 0.0;
    double neg = 0.0;
    while (end < n && scores(order[end]) == scores(order[start])) {
      const int row = order[end++];
      (dataset.labels()(row) > 0 ? pos : neg) += dataset.weights()(row);
    }
    concordant += pos * (negatives_below + 0.5 * neg);
    negatives_below += neg;
    total_pos += pos;
    total_neg += neg;
    start = end;
  }
  if (!(total_pos > 0.0) || !(total_neg > 0.0)) {
    throw DomainError("AUC needs both classes");
  }
  return concordant / (total_pos * total_neg);
}

double EmpiricalKl(const View& view, const Eigen::ArrayXd& q_unfair,
                   const Eigen::ArrayXd& q_fair) {
  double kl = 0.0;
  for (int i = 0; i < view.size(); ++i) {
    const int row = view.rows()[i];
    const double u = q_unfair(row);
    const double f = q_fair(row);
    if (!(u > 0.0 && u < 1.0 && f > 0.0 && f < 1.0)) {
      throw DomainError("KL needs posteriors strictly inside (0,1)");
    }
    kl += view.weights()(i) *
          (u * (std::log(u) - std::log(f)) + (1.0 - u) * (std::log1p(-u) - std::log1p(-f)));
  }
  return kl;
}

double KlBoundS1(double clip_half_width) {
  return std::numbers::pi * std::numbers::pi /
         (6.0 * (2.0 + std::exp(clip_half_width) + std::exp(-clip_half_width)));
}

bool S1Applicable(const AlphaTree& tree, double clip_half_width) {
  if (!(clip_half_width > 0.0 && clip_half_width <= 3.0)) return false;
  for (int leaf : tree.LeafIds()) {
    if (std::abs(tree.leaf(leaf).alpha - 1.0) > 1.0 / clip_half_width) return false;
  }
  return true;
}

double KlBoundS2() { return std::numbers::pi * std::numbers::pi / 24.0; }

bool S2Applicable(const Dataset& dataset, const AlphaTree& tree) {
  const Eigen::ArrayXd alphas = dataset.AlphasFor(tree);
  for (int row = 0; row < dataset.num_rows(); ++row) {
    if (std::abs(Logit(dataset.scores()(row)) * (1.0 - alphas(row))) > 1.0) return false;
  }
  return true;
}

TaylorBound KlTaylorBound(const View& view, const Eigen::ArrayXd& q_unfair,
                          const Eigen::ArrayXd& alphas, int K) {
  if (K < 2) throw DomainError("Taylor order K must be >= 2");
  TaylorBound bound;
  bool converges = true;
  double tail = 0.0;
  for (int i = 0; i < view.size(); ++i) {
    const int row = view.rows()[i];
    const double u = q_unfair(row);
    const double f = std::abs(Logit(u) * (1.0 - alphas(row)));
    const double spread = u * (1.0 - u);
    double power = f;
    double sum = 0.0;
    for (int k = 2; k <= K; ++k) {
      power *= f;
      sum += power / (k * (k - 1.0));
    }
    bound.value += view.weights()(i) * spread * sum;
    if (f > 1.0) converges = false;
    tail += view.weights()(i) * spread * power * f / K;
  }
  bound.tail_bound = converges ? tail : std::numeric_limits<double>::infinity();
  return bound;
}

MetricReport Evaluate(const Dataset& dataset, const AlphaTree& tree, double beta) {
  MetricReport report;
  const Eigen::ArrayXd q = dataset.WrappedScores(tree);
  const View all = View::All(dataset);
  report.cvar = CvarMetric(dataset, tree, beta);
  const GapResult eoo = EooGap(dataset, tree);
  report.eoo_gap = eoo.value;
  report.eoo_excluded = eoo.excluded;
  report.sp_gap = SpGap(dataset, tree);
  report.md = MeanDifference(dataset, tree);
  report.zero_one_error = ZeroOneError(dataset, tree);
  try {
    report.auc = Auc(dataset, q);
  } catch (const DomainError&) {
    report.auc = std::numeric_limits<double>::quiet_NaN();
  }
  report.logloss = EmpiricalRisk(all, q, LabelPlugin(dataset));
  report.empirical_kl = EmpiricalKl(all, dataset.scores(), q);
  return report;
}

}  // namespace alphatree
