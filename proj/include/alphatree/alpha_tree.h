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

// Alpha-tree: a binary decision tree with real-valued leaves. An input is
// routed to exactly one leaf whose alpha corrects the black-box posterior of
// that input (see wrapping.h).

#ifndef ALPHATREE_ALPHA_TREE_H_
#define ALPHATREE_ALPHA_TREE_H_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace alphatree {

// Read access to the features of one input.
class FeatureRecord {
 public:
  virtual ~FeatureRecord() = default;
  // Both throw SchemaError when the feature is absent or of the other kind.
  virtual double Numeric(const std::string& feature) const = 0;
  virtual std::string_view Categorical(const std::string& feature) const = 0;
};

// Feature record backed by a map; handy for single predictions and tests.
class MapRecord : public FeatureRecord {
 public:
  using Value = std::variant<double, std::string>;

  MapRecord() = default;
  MapRecord(std::initializer_list<std::pair<const std::string, Value>> values)
      : values_(values) {}

  MapRecord& Set(const std::string& feature, Value value) {
    values_[feature] = std::move(value);
    return *this;
  }

  double Numeric(const std::string& feature) const override;
  std::string_view Categorical(const std::string& feature) const override;

 private:
  std::map<std::string, Value> values_;
};

// Axis-aligned test. Inputs satisfying the test go to the left child:
// numeric "value <= threshold", categorical "value == modality".
struct SplitTest {
  enum class Kind { kNumeric, kCategorical };

  std::string feature;
  Kind kind = Kind::kNumeric;
  double threshold = 0.0;
  std::string modality;

  static SplitTest Numeric(std::string feature, double threshold) {
    return {std::move(feature), Kind::kNumeric, threshold, {}};
  }
  static SplitTest Categorical(std::string feature, std::string modality) {
    return {std::move(feature), Kind::kCategorical, 0.0, std::move(modality)};
  }

  bool Passes(const FeatureRecord& record) const;
  std::string Describe() const;

  friend bool operator==(const SplitTest&, const SplitTest&) = default;
};

struct Leaf {
  int id = 0;
  double alpha = 1.0;
  // Bookkeeping from the last labelling pass; persisted with the model.
  double edge = 0.0;
  double mass = 0.0;

  friend bool operator==(const Leaf&, const Leaf&) = default;
};

struct InternalNode {
  SplitTest test;
  int left = -1;   // node index
  int right = -1;  // node index

  friend bool operator==(const InternalNode&, const InternalNode&) = default;
};

using TreeNode = std::variant<InternalNode, Leaf>;

class AlphaTree {
 public:
  // Single leaf with the given alpha (1 = identity correction).
  explicit AlphaTree(double root_alpha = 1.0);

  // Validates structure: every internal node has two children, every node is
  // reached exactly once from the root, leaf ids are unique, alphas finite.
  static AlphaTree FromNodes(std::vector<TreeNode> nodes, int root);

  int root() const { return root_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const TreeNode& node(int index) const { return nodes_.at(index); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  // Leaf ids in depth-first (left before right) order.
  std::vector<int> LeafIds() const;
  int num_leaves() const { return static_cast<int>(leaf_index_.size()); }
  bool HasLeaf(int leaf_id) const { return leaf_index_.contains(leaf_id); }
  const Leaf& leaf(int leaf_id) const;
  // Node index of the leaf, throws std::out_of_range when unknown.
  int LeafNode(int leaf_id) const;

  // Leaf id reached by the record.
  int Route(const FeatureRecord& record) const;
  // Leaf id and alpha reached by the record.
  std::pair<int, double> Evaluate(const FeatureRecord& record) const;

  // Turns a leaf into an internal node; returns the ids of the new (left,
  // right) leaves. Both start with the alpha of the split leaf.
  std::pair<int, int> SplitLeaf(int leaf_id, SplitTest test);
  void SetLeafAlpha(int leaf_id, double alpha);
  void SetLeafStats(int leaf_id, double edge, double mass);

  int Depth() const;

  // Structural: same tests, leaf ids and leaf values in the same positions,
  // regardless of node storage order.
  friend bool operator==(const AlphaTree& a, const AlphaTree& b);

 private:
  void Reindex();
  Leaf& MutableLeaf(int leaf_id);

  std::vector<TreeNode> nodes_;
  int root_ = 0;
  int next_leaf_id_ = 0;
  std::unordered_map<int, int> leaf_index_;  // leaf id -> node index
};

// Wraps one posterior with the alpha of the leaf reached by `record`.
double Wrap(const AlphaTree& tree, double q_unfair, const FeatureRecord& record);

// Sequential wrapping by several trees, computed as a single wrap with the
// product of the alphas reached in each tree.
double WrapChain(std::span<const AlphaTree> trees, double q_unfair,
                 const FeatureRecord& record);

// Same structure, every leaf alpha replaced by 1/alpha. Throws
// NonInvertibleError when a leaf has |alpha| < kAlphaZeroTolerance.
AlphaTree InvertTree(const AlphaTree& tree);

}  // namespace alphatree

#endif  // ALPHATREE_ALPHA_TREE_H_
