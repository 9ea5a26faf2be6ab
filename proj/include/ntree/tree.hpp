#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ntree/dataset.hpp"
#include "ntree/perceptron.hpp"

namespace ntree {

using NodeId = std::size_t;

struct LeafNode {
  Label label = 0;
  bool unsplittable = false;

  friend bool operator==(const LeafNode&, const LeafNode&) = default;
};

struct InternalNode {
  PerceptronUnit unit;
  NodeId child0 = 0;
  NodeId child1 = 0;

  friend bool operator==(const InternalNode&, const InternalNode&) = default;
};

struct TreeNode {
  std::variant<InternalNode, LeafNode> kind;
  std::size_t depth = 0;
  /// Indices into the training set; kept while the tree is growing.
  std::vector<std::size_t> assigned;

  bool is_leaf() const noexcept { return std::holds_alternative<LeafNode>(kind); }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary tree of perceptron units with class-labelled leaves, grown one
/// level at a time.
class NeuralTree {
 public:
  NeuralTree() = default;

  /// A single root leaf holding every training pattern. Throws on empty input.
  static NeuralTree create(const Dataset& training);

  /// Expands every expandable leaf (both classes present, not unsplittable).
  /// Returns false when nothing was expanded.
  bool grow_level(const Dataset& training, const PocketConfig& config);

  Label predict(std::span<const double> features) const;
  Label predict(const Pattern& pattern) const { return predict(pattern.features); }
  std::vector<Label> predict_all(const Dataset& data) const;
  double accuracy(const Dataset& data) const;

  /// Number of internal units.
  std::size_t complexity() const noexcept;
  std::size_t leaf_count() const noexcept;
  std::size_t levels_built() const noexcept { return levels_built_; }
  std::size_t dimension() const noexcept { return dimension_; }
  NodeId root() const noexcept { return root_; }
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& node(NodeId id) const { return nodes_.at(id); }

  /// Leaves that grow_level would expand: both classes present among at
  /// least two assigned patterns, not marked unsplittable.
  std::vector<NodeId> expandable_leaves(const Dataset& training) const;

  /// Drops the per-node training assignments.
  void release_assignments();

  /// Text dump, one node per line (see README for the field order).
  std::string serialize() const;
  static NeuralTree deserialize(const std::string& text);

  /// Assembles a tree from explicit nodes; validates the binary structure.
  static NeuralTree from_nodes(std::size_t dimension, std::vector<TreeNode> nodes, NodeId root,
                               std::size_t levels_built = 0);

  friend bool operator==(const NeuralTree&, const NeuralTree&) = default;

 private:
  void validate_structure() const;

  std::size_t dimension_ = 0;
  std::vector<TreeNode> nodes_;
  NodeId root_ = 0;
  std::size_t levels_built_ = 0;
};

/// Majority label of the patterns at `indices`; ties go to class 0.
Label majority_label(const Dataset& data, std::span<const std::size_t> indices);

NeuralTree new_tree(const Dataset& training);

/// Grows until no leaf is expandable.
NeuralTree grow_full(const Dataset& training, const PocketConfig& config);

}  // namespace ntree
