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

#include "alphatree/fairness.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "alphatree/errors.h"
#include "alphatree/estimators.h"

namespace alphatree {
namespace {

constexpr double kMaxK = 100.0;

// Advantage rate of every group that has positive rows.
std::map<std::string, double> AdvantageRates(const Dataset& dataset, const Grouping& grouping,
                                             const AlphaTree& tree) {
  const Eigen::ArrayXd q = dataset.WrappedScores(tree);
  std::vector<double> hit(grouping.num_groups(), 0.0);
  std::vector<double> mass(grouping.num_groups(), 0.0);
  for (int row = 0; row < dataset.num_rows(); ++row) {
    if (dataset.labels()(row) <= 0) continue;
    const int g = grouping.codes[row];
    mass[g] += dataset.weights()(row);
    if (q(row) > 0.5) hit[g] += dataset.weights()(row);
  }
  std::map<std::string, double> rates;
  for (int g = 0; g < grouping.num_groups(); ++g) {
    if (mass[g] > 0.0) rates[grouping.names[g]] = hit[g] / mass[g];
  }
  return rates;
}

// Weighted mean of a dataset-aligned column per group.
std::map<std::string, double> GroupMeans(const Dataset& dataset, const Grouping& grouping,
                                         const Eigen::ArrayXd& column) {
  std::vector<double> sum(grouping.num_groups(), 0.0);
  std::vector<double> mass(grouping.num_groups(), 0.0);
  for (int row = 0; row < dataset.num_rows(); ++row) {
    const int g = grouping.codes[row];
    sum[g] += dataset.weights()(row) * column(row);
    mass[g] += dataset.weights()(row);
  }
  std::map<std::string, double> means;
  for (int g = 0; g < grouping.num_groups(); ++g) {
    if (mass[g] > 0.0) means[grouping.names[g]] = sum[g] / mass[g];
  }
  return means;
}

double Spread(const std::map<std::string, double>& values) {
  if (values.empty()) return 0.0;
  auto [lo, hi] = std::minmax_element(
      values.begin(), values.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  return hi->second - lo->second;
}

// First key (in name order) holding the smallest / largest value.
std::string ArgMin(const std::map<std::string, double>& values) {
  return std::min_element(values.begin(), values.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

std::string ArgMax(const std::map<std::string, double>& values) {
  return std::max_element(values.begin(), values.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

InductionConfig WithIterations(InductionConfig config, int iterations) {
  config.max_iterations = iterations;
  return config;
}

}  // namespace

void StrategySpec::Validate() const {
  induction.Validate();
  if (outer_rounds < 0) throw ConfigError("outer_rounds must be >= 0");
  switch (kind) {
    case StrategyKind::kCvar:
      if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0,1)");
      break;
    case StrategyKind::kEoo:
      if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
      if (!(K > 1.0)) throw ConfigError("K must be > 1");
      break;
    case StrategyKind::kSp:
      if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
      break;
  }
}

std::map<std::string, double> SubgroupRisks(const Dataset& dataset, const Grouping& grouping,
                                            const AlphaTree& tree) {
  const Eigen::ArrayXd q = dataset.WrappedScores(tree);
  const TargetPosterior target = LabelPlugin(dataset);
  std::map<std::string, double> risks;
  for (const std::string& group : grouping.names) {
    risks[group] = EmpiricalRisk(ConditionOnGroup(dataset, grouping, group), q, target);
  }
  return risks;
}

std::map<std::string, double> SubgroupRisks(const Dataset& dataset, const AlphaTree& tree) {
  return SubgroupRisks(dataset, dataset.groups(), tree);
}

CvarSummary CvarQuantile(const std::map<std::string, double>& risks, double beta) {
  if (risks.empty()) throw EmptyMeasureError("no subgroup risks");
  std::vector<std::pair<std::string, double>> sorted(risks.begin(), risks.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const int groups = static_cast<int>(sorted.size());
  const int k = std::clamp(
      static_cast<int>(std::ceil((1.0 - beta) * groups - 1e-12)), 1, groups);
  CvarSummary summary;
  summary.threshold = sorted[k - 1].second;
  double total = 0.0;
  for (const auto& [group, risk] : sorted) {
    if (risk < summary.threshold) break;
    summary.tail.push_back(group);
    total += risk;
  }
  summary.value = total / summary.tail.size();
  return summary;
}

TargetPosterior ApplyPushup(const TargetPosterior& eta, const PushupParams& params) {
  if (params.IsIdentity()) return eta;
  const double top = 0.5 + params.delta;
  Eigen::ArrayXd values = eta.values();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) >= params.eta_floor && values(i) <= top) values(i) = top;
  }
  return TargetPosterior(std::move(values));
}

std::pair<TargetPosterior, PushupParams> PushupPosterior(const TargetPosterior& eta,
                                                         const View& view, double p,
                                                         double delta) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("pushup p must lie in [0,1]");
  if (!(delta >= 0.0 && delta <= 0.5)) throw DomainError("pushup delta must lie in [0,1/2]");
  std::vector<int> order(view.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ea = eta(view.rows()[a]);
    const double eb = eta(view.rows()[b]);
    return ea != eb ? ea > eb : view.rows()[a] < view.rows()[b];
  });
  PushupParams params{p, delta, 1.0};
  double mass = 0.0;
  for (int i : order) {
    if (mass >= p - 1e-12) break;
    mass += view.weights()(i);
    params.eta_floor = eta(view.rows()[i]);
  }
  return {ApplyPushup(eta, params), params};
}

double AdvantageRate(const Dataset& dataset, const Grouping& grouping, const AlphaTree& tree,
                     const std::string& group) {
  const View positives = ConditionPositive(dataset, grouping, group);
  const Eigen::ArrayXd q = dataset.WrappedScores(tree);
  double rate = 0.0;
  for (int i = 0; i < positives.size(); ++i) {
    if (q(positives.rows()[i]) > 0.5) rate += positives.weights()(i);
  }
  return rate;
}

double AdvantageRate(const Dataset& dataset, const AlphaTree& tree, const std::string& group) {
  return AdvantageRate(dataset, dataset.groups(), tree, group);
}

PushupParams EooPushupParams(double best_rate, double epsilon, double K) {
  if (!(epsilon > 0.0) || !(K > 1.0)) throw ConfigError("need epsilon > 0 and K > 1");
  double p = best_rate + epsilon / (K - 1.0);
  if (p > 1.0) {
    if (best_rate >= 1.0) {
      throw ConfigError("best advantage rate is 1: no K makes the pushup p <= 1");
    }
    K = 1.0 + epsilon / (1.0 - best_rate);
    if (K > kMaxK) {
      throw ConfigError("pushup needs K = " + std::to_string(K) + " > 100 to keep p <= 1");
    }
    p = std::min(1.0, best_rate + epsilon / (K - 1.0));
  }
  const double delta = K * epsilon / (K - 1.0);
  if (delta > 0.5) {
    throw ConfigError("pushup delta " + std::to_string(delta) + " exceeds 1/2; lower epsilon");
  }
  return {p, delta, 1.0};
}

DriverResult RunCvar(const Dataset& dataset, const StrategySpec& spec,
                     const AlphaTree& initial, const std::optional<Grouping>& schedule) {
  spec.Validate();
  const Grouping& groups = schedule ? *schedule : dataset.groups();
  const AlignmentInputs inputs = AlignmentInputs::FromDataset(dataset, LabelPlugin(dataset));
  DriverResult result{initial, {}, 0, 0, {}};
  AlphaTree& tree = result.tree;

  auto record = [&](int iteration, const std::string& group, const std::string& event) {
    const auto risks = SubgroupRisks(dataset, tree);
    const double cvar = CvarQuantile(risks, spec.beta).value;
    result.trace.Add(iteration, "cvar", cvar, group, event);
    for (const auto& [name, risk] : risks) result.trace.Add(iteration, "risk", risk, name);
    return cvar;
  };

  double cvar = record(0, {}, "start");
  std::set<std::string> initialized;
  std::set<std::string> exhausted;
  while (true) {
    if (cvar <= spec.risk_threshold) {
      result.stop_reason = "risk_threshold";
      break;
    }
    if (result.rounds >= spec.outer_rounds) {
      result.stop_reason = "outer_rounds";
      break;
    }
    const CvarSummary tail = CvarQuantile(SubgroupRisks(dataset, groups, tree), spec.beta);
    auto pick = std::find_if(tail.tail.begin(), tail.tail.end(),
                             [&](const std::string& g) { return !exhausted.contains(g); });
    if (pick == tail.tail.end()) {
      result.stop_reason = "no_progress";
      break;
    }
    const std::string group = *pick;
    const View view = ConditionOnGroup(dataset, groups, group);
    std::string event;
    if (!initialized.contains(group)) {
      tree = TopDown(view, inputs, tree, WithIterations(spec.induction, 0)).tree;
      initialized.insert(group);
      event = "init";
    } else {
      if (result.splits >= spec.induction.max_iterations) {
        result.stop_reason = "budget";
        break;
      }
      TopDownResult grown = TopDown(view, inputs, tree, WithIterations(spec.induction, 1));
      tree = std::move(grown.tree);
      if (grown.splits == 0) {
        exhausted.insert(group);
        event = "no_split";
      } else {
        result.splits += grown.splits;
        event = "split";
      }
    }
    ++result.rounds;
    cvar = record(result.rounds, group, event);
  }
  return result;
}

DriverResult RunEoo(const Dataset& dataset, const StrategySpec& spec, const AlphaTree& initial,
                    const TargetPosterior& eta_estimate,
                    const std::optional<Grouping>& schedule) {
  spec.Validate();
  if (eta_estimate.size() != dataset.num_rows()) {
    throw DomainError("eta estimate does not match the dataset rows");
  }
  const Grouping& groups = schedule ? *schedule : dataset.groups();
  DriverResult result{initial, {}, 0, 0, {}};
  AlphaTree& tree = result.tree;

  auto record = [&](int iteration, const std::string& group, const std::string& event) {
    const auto rates = AdvantageRates(dataset, dataset.groups(), tree);
    const double gap = Spread(rates);
    result.trace.Add(iteration, "eoo_gap", gap, group, event);
    for (const auto& [name, rate] : rates) result.trace.Add(iteration, "advantage", rate, name);
    return gap;
  };

  auto rates = AdvantageRates(dataset, groups, tree);
  if (rates.size() < 2) {
    result.stop_reason = "single_group";
    record(0, {}, "start");
    return result;
  }
  // The most advantaged group is fixed for the whole run.
  const std::string best = ArgMax(rates);
  std::string low = ArgMin(rates);
  if (low == best || (spec.stop_on_gap && Spread(rates) <= spec.epsilon)) {
    record(0, low, "start");
    result.stop_reason = low == best ? "target_reached" : "gap";
    return result;
  }
  const PushupParams base = EooPushupParams(rates.at(best), spec.epsilon, spec.K);
  result.trace.Add(0, "pushup_p", base.p, best);
  result.trace.Add(0, "pushup_delta", base.delta, best);

  auto pushed_target = [&](const View& view) {
    return PushupPosterior(eta_estimate, view, base.p, base.delta).first;
  };
  View view = ConditionPositive(dataset, groups, low);
  std::optional<AlignmentInputs> inputs =
      AlignmentInputs::FromDataset(dataset, pushed_target(view));

  double gap = record(0, low, "start");
  std::string grown_group = low;
  while (true) {
    // The stopping rule is checked on the measure grown last.
    const Eigen::ArrayXd q = dataset.WrappedScores(tree);
    const double risk = EmpiricalRisk(view, q, inputs->target);
    const double floor = MeanEntropy(view, inputs->target);
    result.trace.Add(result.rounds, "risk_excess", risk - floor, grown_group);
    if (risk <= std::pow(spec.epsilon, 4) / 2.0 + floor) {
      result.stop_reason = "stopping_inequality";
      break;
    }
    if (spec.stop_on_gap && gap <= spec.epsilon) {
      result.stop_reason = "gap";
      break;
    }
    if (result.splits >= spec.induction.max_iterations) {
      result.stop_reason = "budget";
      break;
    }
    TopDownResult grown = TopDown(view, *inputs, tree, WithIterations(spec.induction, 1));
    tree = std::move(grown.tree);
    ++result.rounds;
    if (grown.splits == 0) {
      record(result.rounds, grown_group, "no_split");
      result.stop_reason = "no_split";
      break;
    }
    result.splits += grown.splits;
    std::string event = "split";
    rates = AdvantageRates(dataset, groups, tree);
    low = ArgMin(rates);
    // Once the grown group overtakes the best one, it keeps its target.
    if (low != best && low != grown_group) {
      event = "switch";
      view = ConditionPositive(dataset, groups, low);
      inputs = AlignmentInputs::FromDataset(dataset, pushed_target(view));
      grown_group = low;
    }
    gap = record(result.rounds, grown_group, event);
  }
  return result;
}

DriverResult RunSp(const Dataset& dataset, const StrategySpec& spec, const AlphaTree& initial,
                   const std::optional<Grouping>& schedule) {
  spec.Validate();
  const Grouping& groups = schedule ? *schedule : dataset.groups();
  if (groups.num_groups() < 2) throw ConfigError("statistical parity needs at least 2 groups");
  DriverResult result{initial, {}, 0, 0, {}};
  AlphaTree& tree = result.tree;
  const Eigen::ArrayXd& black_box = dataset.scores();
  const auto black_box_means = GroupMeans(dataset, groups, black_box);

  auto record = [&](int iteration, const std::string& group, const std::string& event) {
    const auto means = GroupMeans(dataset, dataset.groups(), dataset.WrappedScores(tree));
    const double gap = Spread(means);
    result.trace.Add(iteration, "sp_gap", gap, group, event);
    for (const auto& [name, mean] : means) result.trace.Add(iteration, "mean_posterior", mean, name);
    return gap;
  };

  double gap = record(0, {}, "start");
  std::set<std::string> exhausted;
  std::string grown_group;
  while (true) {
    if (gap <= spec.epsilon) {
      result.stop_reason = "gap";
      break;
    }
    if (result.rounds >= spec.outer_rounds) {
      result.stop_reason = "outer_rounds";
      break;
    }
    if (result.splits >= spec.induction.max_iterations) {
      result.stop_reason = "budget";
      break;
    }
    const auto means = GroupMeans(dataset, groups, dataset.WrappedScores(tree));
    const std::string low = ArgMin(means);
    const std::string high = ArgMax(means);
    const bool up = spec.direction == SpDirection::kUp;
    const std::string group = up ? low : high;
    const double level = black_box_means.at(up ? high : low);
    if (exhausted.contains(group)) {
      result.stop_reason = "no_progress";
      break;
    }
    const std::string event = group == grown_group ? "split" : "switch";
    grown_group = group;

    const AlignmentInputs inputs = AlignmentInputs::FromDataset(
        dataset, TargetPosterior(Eigen::ArrayXd::Constant(dataset.num_rows(), level)));
    TopDownResult grown = TopDown(ConditionOnGroup(dataset, groups, group), inputs, tree,
                                  WithIterations(spec.induction, 1));
    tree = std::move(grown.tree);
    ++result.rounds;
    result.splits += grown.splits;
    if (grown.splits == 0) exhausted.insert(group);
    gap = record(result.rounds, group, grown.splits == 0 ? "no_split" : event);
  }
  return result;
}

}  // namespace alphatree
