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

#include "alphatree/estimators.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>

#include "alphatree/errors.h"

namespace alphatree {
namespace {

// Keeps exp() of the log-odds finite; sigmoid(30) is still below 1.
constexpr double kMaxLogOdds = 30.0;
constexpr double kVarianceFloorScale = 1e-9;

double LogNormalDensity(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double MulticlassEntropy(const std::vector<double>& mass) {
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double m : mass) {
    if (m > 0.0) h -= (m / total) * std::log(m / total);
  }
  return h;
}

struct ProxySplit {
  SplitTest test;
  double impurity = 0.0;
};

// Best entropy-reducing split of `rows` for predicting the group codes.
std::optional<ProxySplit> BestProxySplit(const Dataset& dataset, const std::vector<int>& rows,
                                         const InductionConfig& config) {
  const int n = static_cast<int>(rows.size());
  const int num_groups = dataset.groups().num_groups();
  const int min_rows = std::max(
      config.min_child_count,
      static_cast<int>(std::ceil(config.min_child_fraction * n - 1e-12)));
  if (n < 2 * min_rows) return std::nullopt;

  std::vector<double> parent(num_groups, 0.0);
  for (int row : rows) parent[dataset.groups().codes[row]] += dataset.weights()(row);
  const double total = std::accumulate(parent.begin(), parent.end(), 0.0);
  if (!(total > 0.0)) return std::nullopt;
  const double parent_impurity = MulticlassEntropy(parent);

  std::optional<ProxySplit> best;
  auto consider = [&](SplitTest test, const std::vector<double>& left, int left_count) {
    if (left_count < min_rows || n - left_count < min_rows) return;
    std::vector<double> right(num_groups);
    double left_mass = 0.0;
    for (int g = 0; g < num_groups; ++g) {
      right[g] = parent[g] - left[g];
      left_mass += left[g];
    }
    if (!(left_mass > 0.0) || !(total - left_mass > 0.0)) return;
    const double impurity = (left_mass / total) * MulticlassEntropy(left) +
                            (1.0 - left_mass / total) * MulticlassEntropy(right);
    if (!best || impurity < best->impurity) best = ProxySplit{std::move(test), impurity};
  };

  std::vector<int> order(rows);
  for (int f = 0; f < dataset.num_features(); ++f) {
    const FeatureColumn& column = dataset.column(f);
    if (column.spec.kind == FeatureKind::kNumeric) {
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return column.numeric(a) < column.numeric(b);
      });
      std::vector<double> left(num_groups, 0.0);
      for (int k = 0; k + 1 < n; ++k) {
        left[dataset.groups().codes[order[k]]] += dataset.weights()(order[k]);
        const double here = column.numeric(order[k]);
        const double next = column.numeric(order[k + 1]);
        if (!(next > here)) continue;
        consider(SplitTest::Numeric(column.spec.name, here + (next - here) / 2.0), left, k + 1);
      }
    } else {
      std::vector<std::vector<double>> by_code(column.domain.size(),
                                               std::vector<double>(num_groups, 0.0));
      std::vector<int> counts(column.domain.size(), 0);
      for (int row : rows) {
        by_code[column.codes[row]][dataset.groups().codes[row]] += dataset.weights()(row);
        ++counts[column.codes[row]];
      }
      for (size_t code = 0; code < by_code.size(); ++code) {
        consider(SplitTest::Categorical(column.spec.name, column.domain[code]), by_code[code],
                 counts[code]);
      }
    }
  }
  if (best && parent_impurity - best->impurity > config.entropy_improvement_tol) return best;
  return std::nullopt;
}

std::string Majority(const Dataset& dataset, const std::vector<int>& rows) {
  std::vector<double> mass(dataset.groups().num_groups(), 0.0);
  for (int row : rows) mass[dataset.groups().codes[row]] += dataset.weights()(row);
  const auto it = std::max_element(mass.begin(), mass.end());
  return dataset.groups().names[it - mass.begin()];
}

}  // namespace

TargetPosterior LabelPlugin(const Dataset& dataset) {
  return TargetPosterior((dataset.labels() > 0.0).cast<double>());
}

GaussianPlugin GaussianPlugin::Fit(const Dataset& dataset,
                                   const std::vector<std::string>& features) {
  std::vector<int> columns;
  if (features.empty()) {
    for (int f = 0; f < dataset.num_features(); ++f) columns.push_back(f);
  } else {
    for (const std::string& name : features) {
      const int f = dataset.FeatureIndex(name);
      if (f < 0) throw SchemaError("unknown feature '" + name + "'");
      columns.push_back(f);
    }
  }

  double class_mass[2] = {0.0, 0.0};
  for (int row = 0; row < dataset.num_rows(); ++row) {
    class_mass[dataset.labels()(row) > 0 ? 1 : 0] += dataset.weights()(row);
  }
  if (!(class_mass[0] > 0.0) || !(class_mass[1] > 0.0)) {
    throw DomainError("gaussian plug-in needs both classes");
  }

  GaussianPlugin model;
  model.prior_positive_ = class_mass[1] / (class_mass[0] + class_mass[1]);
  for (int f : columns) {
    const FeatureColumn& column = dataset.column(f);
    if (column.spec.kind == FeatureKind::kNumeric) {
      NumericParams params;
      params.feature = column.spec.name;
      const double range = column.numeric.maxCoeff() - column.numeric.minCoeff();
      const double floor =
          std::max(kVarianceFloorScale * range * range, std::numeric_limits<double>::min());
      for (int c = 0; c < 2; ++c) {
        double sum = 0.0;
        for (int row = 0; row < dataset.num_rows(); ++row) {
          if ((dataset.labels()(row) > 0 ? 1 : 0) == c) {
            sum += dataset.weights()(row) * column.numeric(row);
          }
        }
        const double mean = sum / class_mass[c];
        double squares = 0.0;
        for (int row = 0; row < dataset.num_rows(); ++row) {
          if ((dataset.labels()(row) > 0 ? 1 : 0) == c) {
            const double d = column.numeric(row) - mean;
            squares += dataset.weights()(row) * d * d;
          }
        }
        params.mean[c] = mean;
        params.variance[c] = std::max(squares / class_mass[c], floor);
      }
      model.numeric_.push_back(std::move(params));
    } else {
      CategoricalParams params;
      params.feature = column.spec.name;
      params.domain = column.domain;
      for (int c = 0; c < 2; ++c) params.counts[c].assign(column.domain.size(), 0.0);
      for (int row = 0; row < dataset.num_rows(); ++row) {
        const int c = dataset.labels()(row) > 0 ? 1 : 0;
        params.counts[c][column.codes[row]] += dataset.weights()(row);
        params.totals[c] += dataset.weights()(row);
      }
      model.categorical_.push_back(std::move(params));
    }
  }
  return model;
}

GaussianPlugin GaussianPlugin::FromParams(double prior_positive,
                                          std::vector<NumericParams> numeric,
                                          std::vector<CategoricalParams> categorical) {
  if (!(prior_positive > 0.0 && prior_positive < 1.0)) {
    throw DomainError("class prior must lie in (0,1)");
  }
  for (const NumericParams& params : numeric) {
    if (!(params.variance[0] > 0.0) || !(params.variance[1] > 0.0)) {
      throw DomainError("variances must be positive for '" + params.feature + "'");
    }
  }
  GaussianPlugin model;
  model.prior_positive_ = prior_positive;
  model.numeric_ = std::move(numeric);
  model.categorical_ = std::move(categorical);
  return model;
}

double GaussianPlugin::Evaluate(const FeatureRecord& record) const {
  double log_odds = std::log(prior_positive_) - std::log1p(-prior_positive_);
  for (const NumericParams& params : numeric_) {
    const double x = record.Numeric(params.feature);
    log_odds += LogNormalDensity(x, params.mean[1], params.variance[1]) -
                LogNormalDensity(x, params.mean[0], params.variance[0]);
  }
  for (const CategoricalParams& params : categorical_) {
    const std::string_view value = record.Categorical(params.feature);
    const auto it = std::find(params.domain.begin(), params.domain.end(), value);
    const double vocabulary = static_cast<double>(params.domain.size());
    double log_freq[2];
    for (int c = 0; c < 2; ++c) {
      const double count =
          it == params.domain.end() ? 0.0 : params.counts[c][it - params.domain.begin()];
      log_freq[c] = std::log((count + 1.0) / (params.totals[c] + vocabulary + 1.0));
    }
    log_odds += log_freq[1] - log_freq[0];
  }
  return Sigmoid(std::clamp(log_odds, -kMaxLogOdds, kMaxLogOdds));
}

Eigen::ArrayXd GaussianPlugin::EvaluateAll(const Dataset& dataset) const {
  Eigen::ArrayXd out(dataset.num_rows());
  for (int row = 0; row < dataset.num_rows(); ++row) out(row) = Evaluate(dataset.Row(row));
  return out;
}

TargetPosterior GaussianPlugin::Posterior(const Dataset& dataset) const {
  return TargetPosterior(EvaluateAll(dataset));
}

AlphaTree InitStump(const Dataset& dataset) {
  const Grouping& groups = dataset.groups();
  AlphaTree tree;
  int open_leaf = tree.LeafIds().front();
  for (int g = 0; g + 1 < groups.num_groups(); ++g) {
    open_leaf = tree.SplitLeaf(open_leaf,
                               SplitTest::Categorical(dataset.group_column(), groups.names[g]))
                    .second;
  }
  return tree;
}

ProxyGroupTree ProxyGroupTree::Fit(const Dataset& dataset, int max_depth,
                                   const InductionConfig& config) {
  if (dataset.groups().num_groups() < 2) {
    throw DomainError("proxy groups need at least two sensitive modalities");
  }
  if (max_depth < 0) throw ConfigError("proxy depth must be >= 0");
  config.Validate();

  ProxyGroupTree proxy;
  struct Pending {
    int leaf;
    std::vector<int> rows;
    int depth;
  };
  std::vector<int> all(dataset.num_rows());
  std::iota(all.begin(), all.end(), 0);
  std::deque<Pending> queue;
  queue.push_back({proxy.tree_.LeafIds().front(), std::move(all), 0});
  while (!queue.empty()) {
    Pending node = std::move(queue.front());
    queue.pop_front();
    std::optional<ProxySplit> split;
    if (node.depth < max_depth) split = BestProxySplit(dataset, node.rows, config);
    if (!split) {
      proxy.leaf_groups_[node.leaf] = Majority(dataset, node.rows);
      continue;
    }
    const auto [left, right] = proxy.tree_.SplitLeaf(node.leaf, split->test);
    std::vector<int> left_rows;
    std::vector<int> right_rows;
    for (int row : node.rows) {
      (split->test.Passes(dataset.Row(row)) ? left_rows : right_rows).push_back(row);
    }
    queue.push_back({left, std::move(left_rows), node.depth + 1});
    queue.push_back({right, std::move(right_rows), node.depth + 1});
  }
  return proxy;
}

std::string ProxyGroupTree::GroupOf(const FeatureRecord& record) const {
  return leaf_groups_.at(tree_.Route(record));
}

Grouping ProxyGroupTree::Assign(const Dataset& dataset) const {
  const std::vector<int> leaves = dataset.RouteRows(tree_);
  std::set<std::string> used;
  for (int leaf : leaves) used.insert(leaf_groups_.at(leaf));
  Grouping grouping;
  grouping.names.assign(used.begin(), used.end());
  grouping.codes.reserve(leaves.size());
  for (int leaf : leaves) grouping.codes.push_back(grouping.Code(leaf_groups_.at(leaf)));
  return grouping;
}

AlphaTree ProxyGroupTree::InitTree() const {
  AlphaTree tree = tree_;
  for (int leaf : tree.LeafIds()) tree.SetLeafAlpha(leaf, 1.0);
  return tree;
}

}  // namespace alphatree
