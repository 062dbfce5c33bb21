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

#include "alphatree/boosting.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "alphatree/errors.h"

namespace alphatree {
namespace {

double ClampAlpha(double alpha, double cap) { return std::clamp(alpha, -cap, cap); }

// Row -> leaf id for a one-split stump at the root; used to evaluate a split
// test on rows without touching the tree being grown.
std::vector<int> RouteSplit(const Dataset& dataset, const SplitTest& split, int* left_id) {
  AlphaTree stump;
  *left_id = stump.SplitLeaf(stump.LeafIds().front(), split).first;
  return dataset.RouteRows(stump);
}

// Minimum number of rows each child must keep.
int MinChildRows(int parent_rows, const InductionConfig& config) {
  const int by_fraction =
      static_cast<int>(std::ceil(config.min_child_fraction * parent_rows - 1e-12));
  return std::max(config.min_child_count, by_fraction);
}

struct Side {
  double mass = 0.0;
  double signal = 0.0;
  int count = 0;
};

// Fills the split metrics for a left / right partition of a leaf.
SplitCandidate Score(SplitTest test, const Side& left, const Side& right,
                     double parent_entropy) {
  const double total = left.mass + right.mass;
  SplitCandidate candidate;
  candidate.test = std::move(test);
  candidate.parent_entropy = parent_entropy;
  candidate.right_fraction = right.mass / total;
  candidate.left_edge = std::clamp(left.signal / left.mass, -1.0, 1.0);
  candidate.right_edge = std::clamp(right.signal / right.mass, -1.0, 1.0);
  candidate.left_count = left.count;
  candidate.right_count = right.count;
  candidate.entropy = candidate.right_fraction * LeafEntropy(candidate.right_edge) +
                      (1.0 - candidate.right_fraction) * LeafEntropy(candidate.left_edge);
  return candidate;
}

}  // namespace

AlignmentInputs AlignmentInputs::FromScores(const Eigen::ArrayXd& clipped_scores,
                                            const ClipBound& bound,
                                            TargetPosterior target) {
  if (clipped_scores.size() != target.size()) {
    throw DomainError("scores and target posterior have different lengths");
  }
  Eigen::ArrayXd confidence = NormalizedLogits(clipped_scores, bound);
  return {clipped_scores, std::move(confidence), std::move(target), bound};
}

AlignmentInputs AlignmentInputs::UnitConfidence(TargetPosterior target,
                                                const ClipBound& bound) {
  const Eigen::Index n = target.size();
  return {Eigen::ArrayXd::Constant(n, bound.upper()), Eigen::ArrayXd::Ones(n),
          std::move(target), bound};
}

AlignmentInputs AlignmentInputs::FromDataset(const Dataset& dataset,
                                             TargetPosterior target) {
  return FromScores(dataset.scores(), dataset.clip(), std::move(target));
}

Eigen::ArrayXd AlignmentInputs::Wrapped(const Eigen::ArrayXd& alphas) const {
  return ApplyAlpha(scores, alphas);
}

void InductionConfig::Validate() const {
  if (max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
  if (!(min_child_fraction > 0.0 && min_child_fraction < 0.5)) {
    throw ConfigError("min_child_fraction must lie in (0, 0.5)");
  }
  if (min_child_count < 1) throw ConfigError("min_child_count must be >= 1");
  if (!(entropy_improvement_tol >= 0.0)) {
    throw ConfigError("entropy_improvement_tol must be >= 0");
  }
  if (!(alpha_cap > 0.0) || !std::isfinite(alpha_cap)) {
    throw ConfigError("alpha_cap must be positive and finite");
  }
}

double Edge(const View& view, const AlignmentInputs& inputs) {
  double edge = 0.0;
  for (int i = 0; i < view.size(); ++i) edge += view.weights()(i) * inputs.Signal(view.rows()[i]);
  return std::clamp(edge, -1.0, 1.0);
}

EdgeParts EdgePosNeg(const View& view, const AlignmentInputs& inputs) {
  EdgeParts parts;
  for (int i = 0; i < view.size(); ++i) {
    const int row = view.rows()[i];
    const double w = view.weights()(i);
    const double eta = inputs.target(row);
    const double nl = inputs.confidence(row);
    const double up = std::max(0.0, nl);
    const double down = std::max(0.0, -nl);
    parts.positive += w * (eta * up + (1.0 - eta) * down);
    parts.negative += w * (eta * down + (1.0 - eta) * up);
  }
  return parts;
}

LeafStats ComputeLeafStats(const View& view, const AlignmentInputs& inputs) {
  LeafStats stats;
  const EdgeParts parts = EdgePosNeg(view, inputs);
  stats.edge = Edge(view, inputs);
  stats.edge_pos = parts.positive;
  stats.edge_neg = parts.negative;
  stats.mass = 1.0;
  stats.entropy = LeafEntropy(stats.edge);
  return stats;
}

double LeafAlphaConservative(double edge, const ClipBound& bound, double alpha_cap) {
  if (edge >= 1.0 - kEdgeEpsilon) return alpha_cap;
  if (edge <= -1.0 + kEdgeEpsilon) return -alpha_cap;
  const double alpha = (std::log1p(edge) - std::log1p(-edge)) / bound.half_width();
  return ClampAlpha(alpha, alpha_cap);
}

double LeafAlphaAudacious(double edge_pos, double edge_neg, const ClipBound& bound,
                          double alpha_cap) {
  if (edge_pos < 0.0 || edge_neg < 0.0) {
    throw DomainError("edge parts must be nonnegative");
  }
  const bool pos_small = edge_pos < kEdgeEpsilon;
  const bool neg_small = edge_neg < kEdgeEpsilon;
  if (edge_pos == 0.0 && edge_neg == 0.0) {
    throw DomainError("leaf has no alignment signal (e+ = e- = 0)");
  }
  if (pos_small && !neg_small) return -alpha_cap;
  if (neg_small && !pos_small) return alpha_cap;
  if (pos_small && neg_small) {
    // Both tiny but not both zero: fall back to the sign of the difference.
    if (edge_pos == edge_neg) return 0.0;
    return edge_pos > edge_neg ? alpha_cap : -alpha_cap;
  }
  return ClampAlpha(std::log(edge_pos / edge_neg) / bound.half_width(), alpha_cap);
}

double LeafEntropy(double edge) {
  return BinaryEntropy(std::clamp((1.0 + edge) / 2.0, 0.0, 1.0));
}

double AudaciousLeafBound(double edge_pos, double edge_neg) {
  const double total = edge_pos + edge_neg;
  if (total <= 0.0) return std::log(2.0);
  const double h2 = BinaryEntropy(edge_pos / total) / std::log(2.0);
  return std::log(2.0) * (1.0 + total * (h2 - 1.0));
}

double TreeEntropy(const AlphaTree& tree, const View& view, const AlignmentInputs& inputs) {
  const std::vector<int> leaves = view.base().RouteRows(tree);
  std::map<int, double> mass;
  std::map<int, double> signal;
  for (int i = 0; i < view.size(); ++i) {
    const int row = view.rows()[i];
    mass[leaves[row]] += view.weights()(i);
    signal[leaves[row]] += view.weights()(i) * inputs.Signal(row);
  }
  double total = 0.0;
  for (const auto& [leaf, m] : mass) {
    if (m > 0.0) total += m * LeafEntropy(std::clamp(signal[leaf] / m, -1.0, 1.0));
  }
  return total;
}

double TreeAudaciousBound(const AlphaTree& tree, const View& view,
                          const AlignmentInputs& inputs) {
  const std::vector<int> leaves = view.base().RouteRows(tree);
  std::map<int, double> mass;
  for (int i = 0; i < view.size(); ++i) mass[leaves[view.rows()[i]]] += view.weights()(i);
  double total = 0.0;
  for (const auto& [leaf, m] : mass) {
    if (!(m > 0.0)) continue;
    const EdgeParts parts = EdgePosNeg(ConditionOnLeaf(view, leaves, leaf), inputs);
    total += m * AudaciousLeafBound(parts.positive, parts.negative);
  }
  return total;
}

void LabelLeaves(AlphaTree& tree, const View& view, const AlignmentInputs& inputs,
                 const InductionConfig& config) {
  const std::vector<int> leaves = view.base().RouteRows(tree);
  const std::map<int, double> mass = LeafWeights(view, tree);
  for (const auto& [leaf, m] : mass) {
    if (!(m > 0.0)) continue;
    const View leaf_view = ConditionOnLeaf(view, leaves, leaf);
    const LeafStats stats = ComputeLeafStats(leaf_view, inputs);
    double alpha = 0.0;
    if (config.scoring == Scoring::kConservative) {
      alpha = LeafAlphaConservative(stats.edge, inputs.bound, config.alpha_cap);
    } else if (stats.edge_pos > 0.0 || stats.edge_neg > 0.0) {
      alpha = LeafAlphaAudacious(stats.edge_pos, stats.edge_neg, inputs.bound,
                                 config.alpha_cap);
    }
    tree.SetLeafAlpha(leaf, alpha);
    tree.SetLeafStats(leaf, stats.edge, m);
  }
}

std::optional<SplitCandidate> BestSplit(const View& leaf_view,
                                        const AlignmentInputs& inputs,
                                        const InductionConfig& config) {
  const Dataset& dataset = leaf_view.base();
  const int n = leaf_view.size();
  const int min_rows = MinChildRows(n, config);
  if (n < 2 * min_rows) return std::nullopt;

  Eigen::ArrayXd signal(n);
  for (int i = 0; i < n; ++i) {
    signal(i) = leaf_view.weights()(i) * inputs.Signal(leaf_view.rows()[i]);
  }
  const double total_signal = signal.sum();
  const double parent_entropy = LeafEntropy(std::clamp(total_signal, -1.0, 1.0));
  const Eigen::ArrayXd& w = leaf_view.weights();

  std::optional<SplitCandidate> best;
  auto consider = [&](SplitCandidate candidate) {
    if (!best || candidate.entropy < best->entropy) best = std::move(candidate);
  };

  std::vector<int> order(n);
  for (int f = 0; f < dataset.num_features(); ++f) {
    const FeatureColumn& column = dataset.column(f);
    if (column.spec.kind == FeatureKind::kNumeric) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return column.numeric(leaf_view.rows()[a]) < column.numeric(leaf_view.rows()[b]);
      });
      Side left;
      for (int k = 0; k + 1 < n; ++k) {
        const int i = order[k];
        left.mass += w(i);
        left.signal += signal(i);
        ++left.count;
        const double here = column.numeric(leaf_view.rows()[i]);
        const double next = column.numeric(leaf_view.rows()[order[k + 1]]);
        if (!(next > here)) continue;
        if (left.count < min_rows || n - left.count < min_rows) continue;
        const Side right{1.0 - left.mass, total_signal - left.signal, n - left.count};
        if (!(left.mass > 0.0) || !(right.mass > 0.0)) continue;
        const double threshold = here + (next - here) / 2.0;
        consider(Score(SplitTest::Numeric(column.spec.name, threshold), left, right,
                       parent_entropy));
      }
    } else {
      std::vector<Side> by_code(column.domain.size());
      for (int i = 0; i < n; ++i) {
        Side& side = by_code[column.codes[leaf_view.rows()[i]]];
        side.mass += w(i);
        side.signal += signal(i);
        ++side.count;
      }
      for (size_t code = 0; code < by_code.size(); ++code) {
        const Side& left = by_code[code];
        if (left.count < min_rows || n - left.count < min_rows) continue;
        const Side right{1.0 - left.mass, total_signal - left.signal, n - left.count};
        if (!(left.mass > 0.0) || !(right.mass > 0.0)) continue;
        consider(Score(SplitTest::Categorical(column.spec.name, column.domain[code]), left,
                       right, parent_entropy));
      }
    }
  }
  if (best && parent_entropy - best->entropy > config.entropy_improvement_tol) return best;
  return std::nullopt;
}

TopDownResult TopDown(const View& view, const AlignmentInputs& inputs,
                      const AlphaTree& initial, const InductionConfig& config) {
  config.Validate();
  TopDownResult result{initial, {}, 0};
  AlphaTree& tree = result.tree;
  const Dataset& dataset = view.base();

  auto record = [&](int iteration, const char* event) {
    result.trace.Add(iteration, "entropy", TreeEntropy(tree, view, inputs), {}, event);
    const Eigen::ArrayXd q = inputs.Wrapped(dataset.AlphasFor(tree));
    result.trace.Add(iteration, "risk", EmpiricalRisk(view, q, inputs.target), {}, event);
  };

  LabelLeaves(tree, view, inputs, config);
  record(0, "init");

  // Best split per leaf; a leaf's measure only changes when it is split.
  std::map<int, std::optional<SplitCandidate>> cache;
  std::vector<int> leaves = dataset.RouteRows(tree);
  for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
    std::vector<std::pair<double, int>> by_mass;
    for (const auto& [leaf, mass] : LeafWeights(view, tree)) {
      if (mass > 0.0) by_mass.emplace_back(mass, leaf);
    }
    std::sort(by_mass.begin(), by_mass.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });

    int chosen = -1;
    for (const auto& [mass, leaf] : by_mass) {
      auto it = cache.find(leaf);
      if (it == cache.end()) {
        it = cache.emplace(leaf, BestSplit(ConditionOnLeaf(view, leaves, leaf), inputs, config))
                 .first;
      }
      if (it->second) {
        chosen = leaf;
        break;
      }
    }
    if (chosen < 0) break;

    // Weak-hypothesis diagnostics of the split, read on the witnessing
    // orientation; not defined when the leaf edge is +-1.
    const View chosen_view = ConditionOnLeaf(view, leaves, chosen);
    if (std::abs(Edge(chosen_view, inputs)) < 1.0) {
      const WhaReport wha = WhaCheck(chosen_view, cache.at(chosen)->test, inputs);
      const double oriented_ii =
          wha.balanced_correlation >= 0.0 ? wha.condition_ii_value : -wha.condition_ii_value;
      result.trace.Add(iteration, "wha_gamma", wha.gamma_witnessed, {}, "split");
      result.trace.Add(iteration, "wha_condition_ii", oriented_ii, {}, "split");
    }
    tree.SplitLeaf(chosen, cache.at(chosen)->test);
    cache.erase(chosen);
    leaves = dataset.RouteRows(tree);
    LabelLeaves(tree, view, inputs, config);
    ++result.splits;
    record(iteration, "split");
  }
  return result;
}

BalancedMeasure BalancedWeights(const View& leaf_view, const AlignmentInputs& inputs) {
  const double edge = Edge(leaf_view, inputs);
  const double denominator = 1.0 - edge * edge;
  if (!(denominator > 0.0)) {
    throw DomainError("balanced measure is undefined at a leaf with |edge| = 1");
  }
  const int n = leaf_view.size();
  BalancedMeasure measure{Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
  for (int i = 0; i < n; ++i) {
    const int row = leaf_view.rows()[i];
    const double w = leaf_view.weights()(i);
    const double eta = inputs.target(row);
    const double nl = inputs.confidence(row);
    measure.positive(i) = w * eta * (1.0 - edge * nl) / denominator;
    measure.negative(i) = w * (1.0 - eta) * (1.0 + edge * nl) / denominator;
  }
  return measure;
}

WhaReport WhaCheck(const View& leaf_view, const SplitTest& split,
                   const AlignmentInputs& inputs) {
  const BalancedMeasure balanced = BalancedWeights(leaf_view, inputs);
  const double edge = Edge(leaf_view, inputs);
  int left_id = 0;
  const std::vector<int> side = RouteSplit(leaf_view.base(), split, &left_id);
  double correlation = 0.0;
  double confidence_term = 0.0;
  for (int i = 0; i < leaf_view.size(); ++i) {
    const int row = leaf_view.rows()[i];
    const double h = side[row] == left_id ? -1.0 : 1.0;
    const double nl = inputs.confidence(row);
    correlation += (balanced.positive(i) - balanced.negative(i)) * nl * h;
    confidence_term += leaf_view.weights()(i) * (1.0 - nl * nl) * h;
  }
  WhaReport report;
  report.balanced_correlation = correlation;
  report.gamma_witnessed = std::min(1.0, std::abs(correlation));
  report.condition_ii_value = edge * confidence_term;
  return report;
}

SplitGeometry ComputeSplitGeometry(const View& leaf_view, const SplitTest& split,
                                   const AlignmentInputs& inputs) {
  int left_id = 0;
  const std::vector<int> side = RouteSplit(leaf_view.base(), split, &left_id);
  Side left;
  Side right;
  for (int i = 0; i < leaf_view.size(); ++i) {
    const int row = leaf_view.rows()[i];
    Side& s = side[row] == left_id ? left : right;
    s.mass += leaf_view.weights()(i);
    s.signal += leaf_view.weights()(i) * inputs.Signal(row);
    ++s.count;
  }
  SplitGeometry geometry;
  const double total = left.mass + right.mass;
  geometry.tau = right.mass / total;
  geometry.q = (1.0 + std::clamp((left.signal + right.signal) / total, -1.0, 1.0)) / 2.0;
  geometry.p = left.mass > 0.0 ? (1.0 + left.signal / left.mass) / 2.0 : geometry.q;
  geometry.r = right.mass > 0.0 ? (1.0 + right.signal / right.mass) / 2.0 : geometry.q;
  geometry.delta = geometry.r - geometry.p;
  return geometry;
}

bool DecreaseCertificate(double pre_entropy, double post_entropy, double q_leaf,
                         double gamma) {
  return pre_entropy - post_entropy >= gamma * gamma * q_leaf * (1.0 - q_leaf) - 1e-9;
}

}  // namespace alphatree
