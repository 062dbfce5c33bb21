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

#include "alphatree/alpha_tree.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "alphatree/errors.h"
#include "alphatree/wrapping.h"

namespace alphatree {

double MapRecord::Numeric(const std::string& feature) const {
  const auto it = values_.find(feature);
  if (it == values_.end()) {
    throw SchemaError("record has no feature '" + feature + "'");
  }
  if (const double* value = std::get_if<double>(&it->second)) return *value;
  throw SchemaError("feature '" + feature + "' is not numeric");
}

std::string_view MapRecord::Categorical(const std::string& feature) const {
  const auto it = values_.find(feature);
  if (it == values_.end()) {
    throw SchemaError("record has no feature '" + feature + "'");
  }
  if (const std::string* value = std::get_if<std::string>(&it->second)) {
    return *value;
  }
  throw SchemaError("feature '" + feature + "' is not categorical");
}

bool SplitTest::Passes(const FeatureRecord& record) const {
  if (kind == Kind::kNumeric) return record.Numeric(feature) <= threshold;
  return record.Categorical(feature) == modality;
}

std::string SplitTest::Describe() const {
  std::ostringstream out;
  if (kind == Kind::kNumeric) {
    out.precision(6);
    out << feature << " <= " << threshold;
  } else {
    out << feature << " == " << modality;
  }
  return out.str();
}

AlphaTree::AlphaTree(double root_alpha) {
  if (!std::isfinite(root_alpha)) throw DomainError("alpha must be finite");
  nodes_.push_back(Leaf{0, root_alpha, 0.0, 0.0});
  root_ = 0;
  Reindex();
}

AlphaTree AlphaTree::FromNodes(std::vector<TreeNode> nodes, int root) {
  const int n = static_cast<int>(nodes.size());
  if (n == 0 || root < 0 || root >= n) {
    throw FormatError("tree has no valid root");
  }
  std::vector<int> visits(n, 0);
  std::vector<int> stack = {root};
  while (!stack.empty()) {
    const int index = stack.back();
    stack.pop_back();
    if (index < 0 || index >= n) throw FormatError("child index out of range");
    if (++visits[index] > 1) {
      throw FormatError("node " + std::to_string(index) + " reached twice");
    }
    if (const auto* internal = std::get_if<InternalNode>(&nodes[index])) {
      stack.push_back(internal->right);
      stack.push_back(internal->left);
    } else {
      if (!std::isfinite(std::get<Leaf>(nodes[index]).alpha)) {
        throw FormatError("leaf alpha must be finite");
      }
    }
  }
  if (std::find(visits.begin(), visits.end(), 0) != visits.end()) {
    throw FormatError("tree has unreachable nodes");
  }
  AlphaTree tree;
  tree.nodes_ = std::move(nodes);
  tree.root_ = root;
  tree.Reindex();
  return tree;
}

void AlphaTree::Reindex() {
  leaf_index_.clear();
  next_leaf_id_ = 0;
  for (int i = 0; i < num_nodes(); ++i) {
    if (const auto* leaf = std::get_if<Leaf>(&nodes_[i])) {
      if (!leaf_index_.emplace(leaf->id, i).second) {
        throw FormatError("duplicate leaf id " + std::to_string(leaf->id));
      }
      next_leaf_id_ = std::max(next_leaf_id_, leaf->id + 1);
    }
  }
}

std::vector<int> AlphaTree::LeafIds() const {
  std::vector<int> ids;
  ids.reserve(leaf_index_.size());
  std::vector<int> stack = {root_};
  while (!stack.empty()) {
    const int index = stack.back();
    stack.pop_back();
    if (const auto* internal = std::get_if<InternalNode>(&nodes_[index])) {
      stack.push_back(internal->right);
      stack.push_back(internal->left);
    } else {
      ids.push_back(std::get<Leaf>(nodes_[index]).id);
    }
  }
  return ids;
}

int AlphaTree::LeafNode(int leaf_id) const {
  const auto it = leaf_index_.find(leaf_id);
  if (it == leaf_index_.end()) {
    throw std::out_of_range("unknown leaf id " + std::to_string(leaf_id));
  }
  return it->second;
}

const Leaf& AlphaTree::leaf(int leaf_id) const {
  return std::get<Leaf>(nodes_[LeafNode(leaf_id)]);
}

Leaf& AlphaTree::MutableLeaf(int leaf_id) {
  return std::get<Leaf>(nodes_[LeafNode(leaf_id)]);
}

int AlphaTree::Route(const FeatureRecord& record) const {
  int index = root_;
  while (const auto* internal = std::get_if<InternalNode>(&nodes_[index])) {
    index = internal->test.Passes(record) ? internal->left : internal->right;
  }
  return std::get<Leaf>(nodes_[index]).id;
}

std::pair<int, double> AlphaTree::Evaluate(const FeatureRecord& record) const {
  const Leaf& reached = leaf(Route(record));
  return {reached.id, reached.alpha};
}

std::pair<int, int> AlphaTree::SplitLeaf(int leaf_id, SplitTest test) {
  const int index = LeafNode(leaf_id);
  const Leaf parent = std::get<Leaf>(nodes_[index]);
  const int left_id = next_leaf_id_++;
  const int right_id = next_leaf_id_++;
  nodes_.push_back(Leaf{left_id, parent.alpha, parent.edge, 0.0});
  nodes_.push_back(Leaf{right_id, parent.alpha, parent.edge, 0.0});
  const int left = num_nodes() - 2;
  nodes_[index] = InternalNode{std::move(test), left, left + 1};
  leaf_index_.erase(leaf_id);
  leaf_index_.emplace(left_id, left);
  leaf_index_.emplace(right_id, left + 1);
  return {left_id, right_id};
}

namespace {

bool SameSubtree(const AlphaTree& a, int i, const AlphaTree& b, int j) {
  const TreeNode& x = a.node(i);
  const TreeNode& y = b.node(j);
  if (x.index() != y.index()) return false;
  if (const auto* leaf = std::get_if<Leaf>(&x)) return *leaf == std::get<Leaf>(y);
  const auto& u = std::get<InternalNode>(x);
  const auto& v = std::get<InternalNode>(y);
  return u.test == v.test && SameSubtree(a, u.left, b, v.left) &&
         SameSubtree(a, u.right, b, v.right);
}

}  // namespace

bool operator==(const AlphaTree& a, const AlphaTree& b) {
  return SameSubtree(a, a.root(), b, b.root());
}

void AlphaTree::SetLeafAlpha(int leaf_id, double alpha) {
  if (!std::isfinite(alpha)) throw DomainError("alpha must be finite");
  MutableLeaf(leaf_id).alpha = alpha;
}

void AlphaTree::SetLeafStats(int leaf_id, double edge, double mass) {
  Leaf& target = MutableLeaf(leaf_id);
  target.edge = edge;
  target.mass = mass;
}

int AlphaTree::Depth() const {
  int depth = 0;
  std::vector<std::pair<int, int>> stack = {{root_, 0}};
  while (!stack.empty()) {
    const auto [index, level] = stack.back();
    stack.pop_back();
    depth = std::max(depth, level);
    if (const auto* internal = std::get_if<InternalNode>(&nodes_[index])) {
      stack.emplace_back(internal->left, level + 1);
      stack.emplace_back(internal->right, level + 1);
    }
  }
  return depth;
}

double Wrap(const AlphaTree& tree, double q_unfair, const FeatureRecord& record) {
  return ApplyAlpha(q_unfair, tree.Evaluate(record).second);
}

double WrapChain(std::span<const AlphaTree> trees, double q_unfair,
                 const FeatureRecord& record) {
  double alpha = 1.0;
  for (const AlphaTree& tree : trees) {
    alpha = ComposeAlpha(alpha, tree.Evaluate(record).second);
  }
  return ApplyAlpha(q_unfair, alpha);
}

AlphaTree InvertTree(const AlphaTree& tree) {
  std::vector<TreeNode> nodes = tree.nodes();
  for (TreeNode& node : nodes) {
    if (auto* leaf = std::get_if<Leaf>(&node)) {
      if (std::abs(leaf->alpha) < kAlphaZeroTolerance) {
        throw NonInvertibleError("leaf " + std::to_string(leaf->id) +
                                 " has alpha ~ 0 and cannot be inverted");
      }
      leaf->alpha = 1.0 / leaf->alpha;
    }
  }
  return AlphaTree::FromNodes(std::move(nodes), tree.root());
}

}  // namespace alphatree
