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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "alphatree/alpha_tree.h"
#include "alphatree/errors.h"
#include "alphatree/wrapping.h"
#include "test_util.h"

namespace alphatree {
namespace {

using testing::RefPowerWrap;
using testing::RefSigmoid;

TEST(ClipBoundTest, IntervalEndpoints) {
  const ClipBound b1(1.0);
  EXPECT_NEAR(b1.lower(), 1.0 / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_NEAR(b1.upper(), 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(b1.lower() + b1.upper(), 1.0, 1e-15);
  // Endpoints quoted in the source as roughly [0.27, 0.73] and [0.04, 0.96].
  EXPECT_NEAR(b1.lower(), 0.27, 0.005);
  EXPECT_NEAR(b1.upper(), 0.73, 0.005);
  const ClipBound b3(3.0);
  EXPECT_NEAR(b3.lower(), 0.04, 0.01);
  EXPECT_NEAR(b3.upper(), 0.96, 0.01);
  EXPECT_DOUBLE_EQ(b3.half_width(), 3.0);
}

TEST(ClipBoundTest, RejectsNonPositive) {
  EXPECT_THROW(ClipBound(0.0), DomainError);
  EXPECT_THROW(ClipBound(-1.0), DomainError);
  EXPECT_THROW(ClipBound(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST(ClipScoreTest, Examples) {
  const ClipBound b1(1.0);
  EXPECT_DOUBLE_EQ(ClipScore(0.5, b1), 0.5);
  EXPECT_NEAR(ClipScore(0.0, b1), 0.268941, 1e-6);
  EXPECT_NEAR(ClipScore(1.0, ClipBound(3.0)), 0.952574, 1e-6);
  EXPECT_THROW(ClipScore(std::numeric_limits<double>::quiet_NaN(), b1), DomainError);
  EXPECT_THROW(ClipScore(std::numeric_limits<double>::infinity(), b1), DomainError);
}

TEST(ClipScoreTest, IdempotentAndMonotone) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> width(0.1, 4.0);
  for (int t = 0; t < 2000; ++t) {
    const ClipBound b(width(rng));
    const double a = unit(rng);
    const double c = unit(rng);
    const double once = ClipScore(a, b);
    EXPECT_EQ(ClipScore(once, b), once);
    EXPECT_GE(once, b.lower());
    EXPECT_LE(once, b.upper());
    if (a <= c) {
      EXPECT_LE(once, ClipScore(c, b));
    }
  }
}

TEST(LogitTest, Examples) {
  EXPECT_DOUBLE_EQ(Logit(0.5), 0.0);
  EXPECT_NEAR(Logit(0.75), std::log(3.0), 1e-15);
  EXPECT_THROW(Logit(0.0), DomainError);
  EXPECT_THROW(Logit(1.0), DomainError);
  const ClipBound b1(1.0);
  EXPECT_DOUBLE_EQ(NormalizedLogit(1.0 / (1.0 + std::exp(-1.0)), b1), 1.0);
  EXPECT_DOUBLE_EQ(NormalizedLogit(1.0 / (1.0 + std::exp(1.0)), b1), -1.0);
  // 0.75 lies above the B = 1 interval.
  EXPECT_THROW(NormalizedLogit(0.75, b1), DomainError);
  EXPECT_NEAR(NormalizedLogit(0.75, ClipBound(2.0)), std::log(3.0) / 2.0, 1e-15);
}

TEST(ApplyAlphaTest, Examples) {
  EXPECT_NEAR(ApplyAlpha(0.7, 1.0), 0.7, 1e-15);
  EXPECT_DOUBLE_EQ(ApplyAlpha(0.7, 0.0), 0.5);
  EXPECT_NEAR(ApplyAlpha(0.7, 2.0), 0.49 / (0.49 + 0.09), 1e-14);
  EXPECT_NEAR(ApplyAlpha(0.7, 2.0), 0.844827, 1e-6);
  EXPECT_THROW(ApplyAlpha(0.0, 2.0), DomainError);
  EXPECT_THROW(ApplyAlpha(1.0, 2.0), DomainError);
  EXPECT_THROW(ApplyAlpha(0.3, std::numeric_limits<double>::infinity()), DomainError);
}

TEST(ApplyAlphaTest, MatchesPowerFormAndStaysFinite) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> q(0.01, 0.99);
  std::uniform_real_distribution<double> alpha(-8.0, 8.0);
  for (int t = 0; t < 5000; ++t) {
    const double u = q(rng);
    const double a = alpha(rng);
    EXPECT_NEAR(ApplyAlpha(u, a), RefPowerWrap(u, a), 1e-12);
  }
  // Large exponents underflow the power form but not the logit form.
  const double big = ApplyAlpha(0.9, 50.0);
  EXPECT_TRUE(std::isfinite(big));
  EXPECT_GT(big, 0.999999);
}

TEST(ApplyAlphaTest, IdentityAndSymmetry) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> q(1e-6, 1.0 - 1e-6);
  std::uniform_real_distribution<double> alpha(-20.0, 20.0);
  for (int t = 0; t < 5000; ++t) {
    const double u = q(rng);
    const double a = alpha(rng);
    EXPECT_NEAR(ApplyAlpha(u, 1.0), u, 1e-15);
    EXPECT_NEAR(ApplyAlpha(u, a) + ApplyAlpha(1.0 - u, a), 1.0, 1e-12);
  }
}

TEST(ApplyAlphaTest, CompositionWithinTolerance) {
  std::mt19937_64 rng(17);
  const ClipBound b(1.0);
  std::uniform_real_distribution<double> q(b.lower(), b.upper());
  std::uniform_real_distribution<double> alpha(-5.0, 5.0);
  for (int t = 0; t < 10000; ++t) {
    const double u = q(rng);
    const double a = alpha(rng);
    const double c = alpha(rng);
    EXPECT_NEAR(ApplyAlpha(ApplyAlpha(u, a), c), ApplyAlpha(u, ComposeAlpha(a, c)), 1e-12);
  }
  EXPECT_NEAR(ApplyAlpha(0.7, ComposeAlpha(2.0, 1.5)), 0.343 / (0.343 + 0.027), 1e-14);
  EXPECT_NEAR(ApplyAlpha(0.7, ComposeAlpha(2.0, 1.5)), 0.927027, 1e-6);
  EXPECT_DOUBLE_EQ(ApplyAlpha(0.7, ComposeAlpha(3.0, 0.0)), 0.5);
}

TEST(ApplyAlphaTest, TwistPropernessWitness) {
  std::mt19937_64 rng(19);
  const ClipBound b(2.0);
  std::uniform_real_distribution<double> q(b.lower(), b.upper());
  std::uniform_real_distribution<double> target(0.001, 0.999);
  for (int t = 0; t < 5000; ++t) {
    const double u = q(rng);
    if (std::abs(u - 0.5) < 1e-6) continue;
    const double v = target(rng);
    EXPECT_NEAR(ApplyAlpha(u, TwistAlpha(u, v)), v, 1e-10);
  }
  EXPECT_THROW(TwistAlpha(0.5, 0.7), DomainError);
}

TEST(ApplyAlphaTest, EigenOverloadsMatchScalar) {
  Eigen::ArrayXd q(4);
  q << 0.1, 0.4, 0.6, 0.95;
  Eigen::ArrayXd a(4);
  a << 2.0, -1.0, 0.5, 1.0;
  const Eigen::ArrayXd out = ApplyAlpha(q, a);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(out(i), ApplyAlpha(q(i), a(i)));
  const Eigen::ArrayXd clipped = ClipScores(q, ClipBound(1.0));
  EXPECT_NEAR(clipped(0), 1.0 / (1.0 + std::exp(1.0)), 1e-15);
  EXPECT_DOUBLE_EQ(clipped(1), 0.4);
}

AlphaTree TwoThresholdTree() {
  AlphaTree tree;
  const auto [low, high] = tree.SplitLeaf(tree.LeafIds().front(), SplitTest::Numeric("x", 0.3));
  tree.SetLeafAlpha(low, 0.5);
  const auto [mid, top] = tree.SplitLeaf(high, SplitTest::Numeric("x", 0.6));
  tree.SetLeafAlpha(mid, 2.0);
  tree.SetLeafAlpha(top, -1.0);
  return tree;
}

TEST(AlphaTreeTest, SingleLeafEvaluation) {
  const AlphaTree tree;
  ASSERT_EQ(tree.num_leaves(), 1);
  const MapRecord record{{"x", 0.2}};
  const auto [leaf, alpha] = tree.Evaluate(record);
  EXPECT_EQ(leaf, tree.LeafIds().front());
  EXPECT_EQ(alpha, 1.0);
}

TEST(AlphaTreeTest, GroupStumpRoutesLeft) {
  AlphaTree tree;
  const auto [left, right] =
      tree.SplitLeaf(tree.LeafIds().front(), SplitTest::Categorical("s", "a"));
  tree.SetLeafAlpha(left, 2.0);
  tree.SetLeafAlpha(right, 0.5);
  EXPECT_EQ(tree.Evaluate(MapRecord{{"s", std::string("a")}}),
            std::make_pair(left, 2.0));
  EXPECT_EQ(tree.Evaluate(MapRecord{{"s", std::string("b")}}),
            std::make_pair(right, 0.5));
}

TEST(AlphaTreeTest, DepthTwoRoutingByHand) {
  const AlphaTree tree = TwoThresholdTree();
  // x = 0.5 fails "x <= 0.3" and passes "x <= 0.6": the middle leaf.
  EXPECT_EQ(tree.Evaluate(MapRecord{{"x", 0.5}}).second, 2.0);
  EXPECT_EQ(tree.Evaluate(MapRecord{{"x", 0.3}}).second, 0.5);
  EXPECT_EQ(tree.Evaluate(MapRecord{{"x", 0.6}}).second, 2.0);
  EXPECT_EQ(tree.Evaluate(MapRecord{{"x", 0.61}}).second, -1.0);
  EXPECT_EQ(tree.Depth(), 2);
}

TEST(AlphaTreeTest, MissingFeatureIsSchemaError) {
  const AlphaTree tree = TwoThresholdTree();
  EXPECT_THROW(tree.Route(MapRecord{{"y", 0.5}}), SchemaError);
  EXPECT_THROW(tree.Route(MapRecord{{"x", std::string("a")}}), SchemaError);
}

TEST(AlphaTreeTest, EveryInputReachesExactlyOneLeaf) {
  std::mt19937_64 rng(23);
  const Dataset data = testing::RandomDataset(rng, {.rows = 300});
  for (int t = 0; t < 20; ++t) {
    const AlphaTree tree = testing::RandomTree(rng, data, 12, -2.0, 3.0);
    const std::vector<int> routed = data.RouteRows(tree);
    for (int row = 0; row < data.num_rows(); ++row) {
      EXPECT_EQ(routed[row], tree.Route(data.Row(row)));
      EXPECT_TRUE(tree.HasLeaf(routed[row]));
    }
    EXPECT_EQ(tree.num_leaves(), 13);
  }
}

TEST(AlphaTreeTest, RejectsBadAlphaAndUnknownLeaf) {
  AlphaTree tree;
  const int leaf = tree.LeafIds().front();
  EXPECT_THROW(tree.SetLeafAlpha(leaf, std::numeric_limits<double>::quiet_NaN()),
               DomainError);
  EXPECT_ANY_THROW(tree.SetLeafAlpha(leaf + 100, 1.0));
  EXPECT_ANY_THROW(tree.SplitLeaf(leaf + 100, SplitTest::Numeric("x", 0.0)));
}

TEST(AlphaTreeTest, FromNodesValidatesStructure) {
  std::vector<TreeNode> nodes;
  InternalNode split;
  split.test = SplitTest::Numeric("x", 0.0);
  split.left = 1;
  split.right = 2;
  nodes.emplace_back(split);
  nodes.emplace_back(Leaf{.id = 4, .alpha = 2.0});
  nodes.emplace_back(Leaf{.id = 9, .alpha = 0.5});
  const AlphaTree tree = AlphaTree::FromNodes(nodes, 0);
  EXPECT_EQ(tree.LeafIds(), (std::vector<int>{4, 9}));
  // Fresh leaves never reuse an id.
  AlphaTree grown = tree;
  const auto [a, b] = grown.SplitLeaf(9, SplitTest::Numeric("x", 1.0));
  EXPECT_GT(a, 9);
  EXPECT_GT(b, 9);

  std::vector<TreeNode> duplicate = nodes;
  std::get<Leaf>(duplicate[2]).id = 4;
  EXPECT_THROW(AlphaTree::FromNodes(duplicate, 0), FormatError);
  std::vector<TreeNode> dangling = nodes;
  std::get<InternalNode>(dangling[0]).right = 7;
  EXPECT_THROW(AlphaTree::FromNodes(dangling, 0), FormatError);
  std::vector<TreeNode> shared = nodes;
  std::get<InternalNode>(shared[0]).right = 1;
  EXPECT_THROW(AlphaTree::FromNodes(shared, 0), FormatError);
  std::vector<TreeNode> infinite = nodes;
  std::get<Leaf>(infinite[1]).alpha = std::numeric_limits<double>::infinity();
  EXPECT_THROW(AlphaTree::FromNodes(infinite, 0), FormatError);
}

TEST(WrapTest, Examples) {
  const AlphaTree ones;
  const MapRecord record{{"s", std::string("a")}};
  EXPECT_NEAR(Wrap(ones, 0.62, record), 0.62, 1e-15);

  AlphaTree stump;
  const auto [left, right] =
      stump.SplitLeaf(stump.LeafIds().front(), SplitTest::Categorical("s", "a"));
  stump.SetLeafAlpha(left, -1.0);
  (void)right;
  const double upper = 1.0 / (1.0 + std::exp(-1.0));
  EXPECT_NEAR(Wrap(stump, upper, record), 1.0 - upper, 1e-15);
  EXPECT_NEAR(Wrap(stump, upper, record), 0.26894, 1e-5);

  const AlphaTree two(2.0);
  EXPECT_NEAR(Wrap(two, 0.7, record), 0.844827, 1e-6);
}

TEST(WrapChainTest, ProductOfAlphas) {
  const MapRecord record{{"x", 0.5}};
  const std::vector<AlphaTree> inverse_pair = {AlphaTree(2.0), AlphaTree(0.5)};
  EXPECT_NEAR(WrapChain(inverse_pair, 0.63, record), 0.63, 1e-15);
  const std::vector<AlphaTree> zero = {AlphaTree(3.0), AlphaTree(0.0)};
  EXPECT_DOUBLE_EQ(WrapChain(zero, 0.63, record), 0.5);
  const std::vector<AlphaTree> chain = {AlphaTree(2.0), AlphaTree(1.5)};
  EXPECT_NEAR(WrapChain(chain, 0.7, record), 0.927027, 1e-6);
}

TEST(WrapChainTest, SequentialEqualsChain) {
  std::mt19937_64 rng(29);
  const Dataset data = testing::RandomDataset(rng, {.rows = 100});
  for (int t = 0; t < 20; ++t) {
    const std::vector<AlphaTree> trees = {testing::RandomTree(rng, data, 5, -3.0, 3.0),
                                          testing::RandomTree(rng, data, 5, -3.0, 3.0)};
    for (int row = 0; row < data.num_rows(); ++row) {
      const RowRecord record = data.Row(row);
      const double q = data.scores()(row);
      const double sequential = Wrap(trees[1], Wrap(trees[0], q, record), record);
      EXPECT_NEAR(WrapChain(trees, q, record), sequential, 1e-12);
    }
  }
}

TEST(InvertTreeTest, Examples) {
  const AlphaTree ones;
  EXPECT_EQ(InvertTree(ones), ones);
  const AlphaTree two(2.0);
  EXPECT_DOUBLE_EQ(InvertTree(two).leaf(two.LeafIds().front()).alpha, 0.5);
  EXPECT_THROW(InvertTree(AlphaTree(1e-15)), NonInvertibleError);
}

TEST(InvertTreeTest, ChainWithInverseIsIdentity) {
  std::mt19937_64 rng(31);
  const Dataset data = testing::RandomDataset(rng, {.rows = 200});
  for (int t = 0; t < 20; ++t) {
    const AlphaTree tree = testing::RandomTree(rng, data, 8, 0.2, 4.0);
    const std::vector<AlphaTree> chain = {tree, InvertTree(tree)};
    for (int row = 0; row < data.num_rows(); ++row) {
      EXPECT_NEAR(WrapChain(chain, data.scores()(row), data.Row(row)), data.scores()(row),
                  1e-10);
    }
  }
}

}  // namespace
}  // namespace alphatree
