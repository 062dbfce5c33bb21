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

// Fairness drivers built on TopDown.
//
// Each driver repeatedly picks a sensitive group and grows the part of the
// alpha-tree reached by that group, one split per round:
//   cvar  the worst group of the risk tail, on its own measure;
//   eoo   the least advantaged group, on its positives, with a pushed-up
//         target posterior;
//   sp    the group with the lowest (or highest) mean posterior, towards the
//         black-box mean of the opposite extreme.
//
// Drivers take two groupings: the schedule grouping decides which rows are
// grown (original or proxy groups) and the dataset grouping is what the
// reported fairness metrics use.

#ifndef ALPHATREE_FAIRNESS_H_
#define ALPHATREE_FAIRNESS_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "alphatree/alpha_tree.h"
#include "alphatree/boosting.h"
#include "alphatree/dataset.h"
#include "alphatree/measures.h"
#include "alphatree/trace.h"

namespace alphatree {

enum class StrategyKind { kCvar, kEoo, kSp };
enum class SpDirection { kUp, kDown };

struct StrategySpec {
  StrategyKind kind = StrategyKind::kCvar;
  // cvar
  double beta = 0.9;
  double risk_threshold = 0.0;
  // cvar and sp; eoo is bounded by induction.max_iterations only
  int outer_rounds = 64;
  // eoo and sp
  double epsilon = 0.1;
  // eoo
  double K = 2.0;
  bool stop_on_gap = true;
  // sp
  SpDirection direction = SpDirection::kUp;

  // Total split budget and per-split settings.
  InductionConfig induction;

  // Throws ConfigError when a field is out of range.
  void Validate() const;
};

struct PushupParams {
  double p = 0.0;
  double delta = 0.0;
  double eta_floor = 1.0;  // min eta over the top-p rows

  bool IsIdentity() const { return eta_floor >= 0.5; }
};

struct CvarSummary {
  double threshold = 0.0;          // L_beta
  std::vector<std::string> tail;   // S_beta, worst first
  double value = 0.0;              // CVaR_beta
};

struct DriverResult {
  AlphaTree tree;
  RunTrace trace;
  int rounds = 0;
  int splits = 0;
  std::string stop_reason;
};

// Log-loss of the wrapped posterior against the labels, per group.
std::map<std::string, double> SubgroupRisks(const Dataset& dataset, const AlphaTree& tree);
std::map<std::string, double> SubgroupRisks(const Dataset& dataset, const Grouping& grouping,
                                            const AlphaTree& tree);

// k = max(1, ceil((1 - beta) G)) of the G groups form the tail; L_beta is the
// k-th largest risk and every group at or above it is in the tail.
CvarSummary CvarQuantile(const std::map<std::string, double>& risks, double beta);

// The (p, delta)-pushup of `eta`. X_p is the top-p weight of the view taken
// in decreasing eta (ties by row). The map is applied to every dataset row.
std::pair<TargetPosterior, PushupParams> PushupPosterior(const TargetPosterior& eta,
                                                         const View& view, double p,
                                                         double delta);
// Applies a pushup with known floor: eta in [floor, 1/2 + delta] -> 1/2 + delta.
TargetPosterior ApplyPushup(const TargetPosterior& eta, const PushupParams& params);

// Weighted fraction of the positives of `group` with q_fair > 1/2.
double AdvantageRate(const Dataset& dataset, const AlphaTree& tree, const std::string& group);
double AdvantageRate(const Dataset& dataset, const Grouping& grouping, const AlphaTree& tree,
                     const std::string& group);

// Pushup parameters for the advantage rate of the fixed best group; K is
// raised (up to 100) when p would exceed 1. Throws ConfigError otherwise, or
// when delta would exceed 1/2.
PushupParams EooPushupParams(double best_rate, double epsilon, double K);

DriverResult RunCvar(const Dataset& dataset, const StrategySpec& spec,
                     const AlphaTree& initial,
                     const std::optional<Grouping>& schedule = std::nullopt);

DriverResult RunEoo(const Dataset& dataset, const StrategySpec& spec,
                    const AlphaTree& initial, const TargetPosterior& eta_estimate,
                    const std::optional<Grouping>& schedule = std::nullopt);

DriverResult RunSp(const Dataset& dataset, const StrategySpec& spec, const AlphaTree& initial,
                   const std::optional<Grouping>& schedule = std::nullopt);

}  // namespace alphatree

#endif  // ALPHATREE_FAIRNESS_H_
