#include "ntree/tree.hpp"

#include <charconv>
#include <numeric>
#include <sstream>

#include "ntree/error.hpp"
#include "ntree/random.hpp"

namespace ntree {

Label majority_label(const Dataset& data, std::span<const std::size_t> indices) {
  std::array<std::size_t, 2> counts{};
  for (std::size_t i : indices) ++counts[data[i].label];
  return counts[1] > counts[0] ? 1 : 0;
}

NeuralTree NeuralTree::create(const Dataset& training) {
  if (training.empty()) throw Error("empty-training", "cannot grow a tree on an empty training set");
  NeuralTree tree;
  tree.dimension_ = training.dimension();
  TreeNode root;
  root.assigned.resize(training.size());
  std::iota(root.assigned.begin(), root.assigned.end(), std::size_t{0});
  root.kind = LeafNode{majority_label(training, root.assigned), false};
  tree.nodes_.push_back(std::move(root));
  tree.root_ = 0;
  return tree;
}

NeuralTree new_tree(const Dataset& training) { return NeuralTree::create(training); }

std::vector<NodeId> NeuralTree::expandable_leaves(const Dataset& training) const {
  std::vector<NodeId> out;
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    const auto* leaf = std::get_if<LeafNode>(&nodes_[id].kind);
    if (leaf == nullptr || leaf->unsplittable || nodes_[id].assigned.size() < 2) continue;
    std::array<std::size_t, 2> counts{};
    for (std::size_t i : nodes_[id].assigned) ++counts[training[i].label];
    if (counts[0] > 0 && counts[1] > 0) out.push_back(id);
  }
  return out;
}

bool NeuralTree::grow_level(const Dataset& training, const PocketConfig& config) {
  if (training.dimension() != dimension_) {
    throw Error("dimension-mismatch", "training set dimension differs from the tree's");
  }
  const std::vector<NodeId> frontier = expandable_leaves(training);
  bool grew = false;
  for (NodeId id : frontier) {
    PocketConfig node_config = config;
    node_config.seed = derive_seed(config.seed, derive_seed(stream::kNode, id));
    PerceptronUnit unit;
    try {
      unit = train_pocket_ratchet(training, nodes_[id].assigned, node_config);
    } catch (const Error& e) {
      if (e.code() != "cannot-split") throw;
      std::get<LeafNode>(nodes_[id].kind).unsplittable = true;
      continue;
    }

    std::array<std::vector<std::size_t>, 2> halves;
    for (std::size_t i : nodes_[id].assigned) halves[side(unit, training[i])].push_back(i);

    const std::size_t depth = nodes_[id].depth + 1;
    std::array<NodeId, 2> children{};
    for (Label s = 0; s < 2; ++s) {
      TreeNode child;
      child.depth = depth;
      child.kind = LeafNode{majority_label(training, halves[s]), false};
      child.assigned = std::move(halves[s]);
      children[s] = nodes_.size();
      nodes_.push_back(std::move(child));
    }
    nodes_[id].kind = InternalNode{std::move(unit), children[0], children[1]};
    grew = true;
  }
  if (grew) ++levels_built_;
  return grew;
}

NeuralTree grow_full(const Dataset& training, const PocketConfig& config) {
  NeuralTree tree = NeuralTree::create(training);
  while (tree.grow_level(training, config)) {
  }
  return tree;
}

Label NeuralTree::predict(std::span<const double> features) const {
  if (nodes_.empty()) throw Error("empty-tree", "predict on an empty tree");
  if (features.size() != dimension_) {
    throw Error("dimension-mismatch", "pattern has " + std::to_string(features.size()) +
                                          " features, tree expects " + std::to_string(dimension_));
  }
  NodeId id = root_;
  while (true) {
    const auto& kind = nodes_[id].kind;
    if (const auto* leaf = std::get_if<LeafNode>(&kind)) return leaf->label;
    const auto& inner = std::get<InternalNode>(kind);
    id = side(inner.unit, features) == 0 ? inner.child0 : inner.child1;
  }
}

std::vector<Label> NeuralTree::predict_all(const Dataset& data) const {
  std::vector<Label> out;
  out.reserve(data.size());
  for (const auto& p : data) out.push_back(predict(p));
  return out;
}

double NeuralTree::accuracy(const Dataset& data) const {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& p : data) correct += predict(p) == p.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::size_t NeuralTree::complexity() const noexcept {
  std::size_t n = 0;
  for (const auto& node : nodes_) n += node.is_leaf() ? 0 : 1;
  return n;
}

std::size_t NeuralTree::leaf_count() const noexcept { return nodes_.size() - complexity(); }

void NeuralTree::release_assignments() {
  for (auto& node : nodes_) {
    node.assigned.clear();
    node.assigned.shrink_to_fit();
  }
}

// ---------------------------------------------------------------------------
// Structure and serialization

NeuralTree NeuralTree::from_nodes(std::size_t dimension, std::vector<TreeNode> nodes, NodeId root,
                                  std::size_t levels_built) {
  NeuralTree tree;
  tree.dimension_ = dimension;
  tree.nodes_ = std::move(nodes);
  tree.root_ = root;
  tree.levels_built_ = levels_built;
  tree.validate_structure();
  return tree;
}

void NeuralTree::validate_structure() const {
  if (dimension_ == 0) throw Error("bad-tree", "tree dimension must be positive");
  if (root_ >= nodes_.size()) throw Error("bad-tree", "root id out of range");
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeId> stack{root_};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    if (id >= nodes_.size()) throw Error("bad-tree", "child id out of range");
    if (seen[id]) throw Error("bad-tree", "node " + std::to_string(id) + " reached twice");
    seen[id] = true;
    if (const auto* inner = std::get_if<InternalNode>(&nodes_[id].kind)) {
      if (inner->unit.weights.size() != dimension_) {
        throw Error("bad-tree", "node " + std::to_string(id) + " has wrong weight count");
      }
      stack.push_back(inner->child0);
      stack.push_back(inner->child1);
    } else if (const auto& leaf = std::get<LeafNode>(nodes_[id].kind);
               leaf.label != 0 && leaf.label != 1) {
      throw Error("bad-tree", "leaf label must be 0 or 1");
    }
  }
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    if (!seen[id]) throw Error("bad-tree", "node " + std::to_string(id) + " is unreachable");
  }
}

namespace {

void put_double(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

double read_double(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw Error("bad-tree", "truncated tree text");
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error("bad-tree", "bad number '" + token + "' in tree text");
  }
  return v;
}

std::size_t read_size(std::istream& in) {
  long long v = 0;
  if (!(in >> v) || v < 0) throw Error("bad-tree", "expected a non-negative integer in tree text");
  return static_cast<std::size_t>(v);
}

void expect(std::istream& in, const std::string& word) {
  std::string token;
  if (!(in >> token) || token != word) {
    throw Error("bad-tree", "expected '" + word + "' in tree text, got '" + token + "'");
  }
}

}  // namespace

std::string NeuralTree::serialize() const {
  std::ostringstream out;
  out << "ntree 1\n"
      << "dimension " << dimension_ << '\n'
      << "root " << root_ << '\n'
      << "levels " << levels_built_ << '\n'
      << "nodes " << nodes_.size() << '\n';
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    const auto& node = nodes_[id];
    out << id << ' ';
    if (const auto* leaf = std::get_if<LeafNode>(&node.kind)) {
      out << "leaf " << node.depth << ' ' << leaf->label << ' ' << (leaf->unsplittable ? 1 : 0);
    } else {
      const auto& inner = std::get<InternalNode>(node.kind);
      out << "internal " << node.depth << ' ' << inner.child0 << ' ' << inner.child1 << ' ';
      put_double(out, inner.unit.train_accuracy);
      out << ' ';
      put_double(out, inner.unit.bias);
      for (double w : inner.unit.weights) {
        out << ' ';
        put_double(out, w);
      }
    }
    out << '\n';
  }
  return out.str();
}

NeuralTree NeuralTree::deserialize(const std::string& text) {
  std::istringstream in(text);
  expect(in, "ntree");
  if (read_size(in) != 1) throw Error("bad-tree", "unsupported tree format version");
  expect(in, "dimension");
  const std::size_t dimension = read_size(in);
  expect(in, "root");
  const NodeId root = read_size(in);
  expect(in, "levels");
  const std::size_t levels = read_size(in);
  expect(in, "nodes");
  const std::size_t count = read_size(in);

  std::vector<TreeNode> nodes(count);
  for (std::size_t n = 0; n < count; ++n) {
    if (read_size(in) != n) throw Error("bad-tree", "node ids must be listed in order");
    std::string kind;
    in >> kind;
    auto& node = nodes[n];
    node.depth = read_size(in);
    if (kind == "leaf") {
      LeafNode leaf;
      leaf.label = static_cast<Label>(read_size(in));
      leaf.unsplittable = read_size(in) != 0;
      node.kind = leaf;
    } else if (kind == "internal") {
      InternalNode inner;
      inner.child0 = read_size(in);
      inner.child1 = read_size(in);
      inner.unit.train_accuracy = read_double(in);
      inner.unit.bias = read_double(in);
      inner.unit.weights.resize(dimension);
      for (double& w : inner.unit.weights) w = read_double(in);
      node.kind = std::move(inner);
    } else {
      throw Error("bad-tree", "unknown node kind '" + kind + "'");
    }
  }
  return from_nodes(dimension, std::move(nodes), root, levels);
}

}  // namespace ntree
