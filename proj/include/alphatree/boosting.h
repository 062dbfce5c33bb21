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

// Top-down induction of alpha-trees.
//
// The unit of bookkeeping is the alignment edge of a measure,
//
//   edge = E[Y * nlogit(q_u(X))],   Y ~ eta_t(X),
//
// computed deterministically as sum_i w_i (2 eta_i - 1) nlogit_i. Leaves are
// labelled from their edge (conservative) or from its positive / negative
// parts (audacious); splits minimize the leaf-weighted binary entropy of
// (1 + edge) / 2, which upper-bounds the log-loss of the wrapped posterior.

#ifndef ALPHATREE_BOOSTING_H_
#define ALPHATREE_BOOSTING_H_

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "alphatree/alpha_tree.h"
#include "alphatree/measures.h"
#include "alphatree/trace.h"
#include "alphatree/wrapping.h"

namespace alphatree {

// Guards the logs of the leaf labels near |edge| = 1 or a vanishing edge part.
inline constexpr double kEdgeEpsilon = 1e-9;

// Confidence (normalized logit of the black-box score) and target posterior
// of every dataset row.
struct AlignmentInputs {
  Eigen::ArrayXd scores;      // clipped black-box posterior
  Eigen::ArrayXd confidence;  // nlogit of scores, in [-1, 1]
  TargetPosterior target;
  ClipBound bound{1.0};

  static AlignmentInputs FromScores(const Eigen::ArrayXd& clipped_scores,
                                    const ClipBound& bound, TargetPosterior target);
  // Scores pinned to the upper clip end so the confidence is the constant 1:
  // edges reduce to label purity.
  static AlignmentInputs UnitConfidence(TargetPosterior target, const ClipBound& bound);
  // Clipped scores of the dataset.
  static AlignmentInputs FromDataset(const Dataset& dataset, TargetPosterior target);

  // Posterior wrapped by the leaf alphas of every row.
  Eigen::ArrayXd Wrapped(const Eigen::ArrayXd& alphas) const;

  // Expected y * nlogit at a row: (2 eta - 1) * nlogit.
  double Signal(int row) const { return (2.0 * target(row) - 1.0) * confidence(row); }
};

struct EdgeParts {
  double positive = 0.0;  // e+
  double negative = 0.0;  // e-
};

struct LeafStats {
  double edge = 0.0;
  double edge_pos = 0.0;
  double edge_neg = 0.0;
  double mass = 0.0;
  double entropy = 0.0;
};

enum class Scoring { kConservative, kAudacious };

struct InductionConfig {
  int max_iterations = 32;
  double min_child_fraction = 0.10;
  int min_child_count = 30;
  Scoring scoring = Scoring::kConservative;
  double entropy_improvement_tol = 1e-10;
  double alpha_cap = kDefaultAlphaCap;

  // Throws ConfigError on out-of-range fields.
  void Validate() const;
};

struct SplitCandidate {
  SplitTest test;
  // tau * H_right + (1 - tau) * H_left under the leaf measure.
  double entropy = 0.0;
  double parent_entropy = 0.0;
  double right_fraction = 0.0;  // tau
  double left_edge = 0.0;
  double right_edge = 0.0;
  int left_count = 0;
  int right_count = 0;
};

struct WhaReport {
  // E_balanced[Y nlogit h] (signed) and its magnitude.
  double balanced_correlation = 0.0;
  double gamma_witnessed = 0.0;
  // edge * E[(1 - nlogit^2) h] under the leaf measure.
  double condition_ii_value = 0.0;

  // Condition (ii) is read on the orientation of the split (h or -h) whose
  // balanced correlation is non-negative.
  bool HoldsAt(double gamma) const {
    const double oriented_ii =
        balanced_correlation >= 0.0 ? condition_ii_value : -condition_ii_value;
    return gamma_witnessed >= gamma && oriented_ii <= 0.0;
  }
};

// Quantities describing how a split h partitions a leaf (h = +1 on the right
// child): q, p, r are (1 + edge) / 2 at the leaf, left and right child.
struct SplitGeometry {
  double tau = 0.0;
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
  double delta = 0.0;  // r - p
};

// Per-row balanced weights of the pairs (x, +1) and (x, -1), aligned with the
// view rows.
struct BalancedMeasure {
  Eigen::ArrayXd positive;
  Eigen::ArrayXd negative;

  double total() const { return positive.sum() + negative.sum(); }
};

struct TopDownResult {
  AlphaTree tree;
  RunTrace trace;
  int splits = 0;
};

double Edge(const View& view, const AlignmentInputs& inputs);
EdgeParts EdgePosNeg(const View& view, const AlignmentInputs& inputs);
LeafStats ComputeLeafStats(const View& view, const AlignmentInputs& inputs);

// (1/B) log((1 + edge) / (1 - edge)), +-cap once |edge| >= 1 - kEdgeEpsilon.
double LeafAlphaConservative(double edge, const ClipBound& bound,
                             double alpha_cap = kDefaultAlphaCap);
// (1/B) log(e+ / e-), +-cap when one part is below kEdgeEpsilon. Throws
// DomainError when both parts vanish.
double LeafAlphaAudacious(double edge_pos, double edge_neg, const ClipBound& bound,
                          double alpha_cap = kDefaultAlphaCap);

double LeafEntropy(double edge);
// Leaf-weighted entropy of the leaves reached by the view.
double TreeEntropy(const AlphaTree& tree, const View& view, const AlignmentInputs& inputs);

// log 2 * (1 + (e+ + e-)(H2(e+ / (e+ + e-)) - 1)), log 2 when e+ + e- = 0.
double AudaciousLeafBound(double edge_pos, double edge_neg);
double TreeAudaciousBound(const AlphaTree& tree, const View& view,
                          const AlignmentInputs& inputs);

// Relabels every leaf reached by the view with the configured scoring and
// records its stats. Leaves the view does not reach keep their alpha.
void LabelLeaves(AlphaTree& tree, const View& view, const AlignmentInputs& inputs,
                 const InductionConfig& config);

// Lowest weighted two-child entropy among the size-feasible axis-aligned
// splits of the leaf measure; nullopt unless it improves on the leaf entropy
// by more than config.entropy_improvement_tol.
std::optional<SplitCandidate> BestSplit(const View& leaf_view,
                                        const AlignmentInputs& inputs,
                                        const InductionConfig& config);

// Grows `initial` on the view: split the heaviest splittable leaf, relabel,
// repeat until max_iterations or no leaf admits an improving split. The trace
// holds entropy and risk per iteration, and per split the witnessed gamma
// ("wha_gamma") and condition (ii) on the witnessing orientation
// ("wha_condition_ii", <= 0 when the assumption holds).
TopDownResult TopDown(const View& view, const AlignmentInputs& inputs,
                      const AlphaTree& initial, const InductionConfig& config);

// Balanced product measure at a leaf. Throws DomainError when |edge| = 1.
BalancedMeasure BalancedWeights(const View& leaf_view, const AlignmentInputs& inputs);

WhaReport WhaCheck(const View& leaf_view, const SplitTest& split,
                   const AlignmentInputs& inputs);

SplitGeometry ComputeSplitGeometry(const View& leaf_view, const SplitTest& split,
                                   const AlignmentInputs& inputs);

// pre - post >= gamma^2 q (1 - q) - 1e-9.
bool DecreaseCertificate(double pre_entropy, double post_entropy, double q_leaf,
                         double gamma);

}  // namespace alphatree

#endif  // ALPHATREE_BOOSTING_H_
