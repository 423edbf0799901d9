#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gwsnake {

using Node = std::uint32_t;
inline constexpr Node kNoParent = static_cast<Node>(-1);

// Rooted ordered tree. Nodes are identified by their rank in lexicographic
// (depth-first) order, so the root is 0 and node k is u(k).
class PlanarTree {
 public:
  PlanarTree() = default;

  // Builds the tree whose child counts, read in depth-first order, are `seq`.
  // Throws InvalidSequenceError naming the first index where the partial
  // sums of (c - 1) leave the Lukasiewicz domain.
  static PlanarTree from_child_counts(std::span<const std::uint32_t> seq);

  std::size_t edges() const { return child_counts_.empty() ? 0 : child_counts_.size() - 1; }
  std::size_t size() const { return child_counts_.size(); }

  Node parent(Node v) const { return parent_[v]; }
  std::uint32_t child_count(Node v) const { return child_counts_[v]; }
  std::uint32_t depth(Node v) const { return depth_[v]; }
  // Position j >= 1 of v among its father's children; 0 for the root.
  std::uint32_t child_index(Node v) const { return child_index_[v]; }
  std::uint32_t subtree_size(Node v) const { return subtree_size_[v]; }
  std::span<const Node> children(Node v) const {
    return {children_.data() + child_offset_[v], child_counts_[v]};
  }
  Node child(Node v, std::uint32_t j) const { return children_[child_offset_[v] + j - 1]; }

  std::span<const std::uint32_t> child_counts() const { return child_counts_; }
  std::span<const std::uint32_t> depths() const { return depth_; }
  std::uint32_t max_degree() const { return max_degree_; }
  std::uint32_t height() const { return height_; }

  // a is an ancestor of v or equal to it.
  bool is_ancestor_or_self(Node a, Node v) const {
    return a <= v && v < a + subtree_size_[a];
  }
  // Deepest common ancestor.
  Node common_ancestor(Node a, Node b) const;
  // Ancestor of v at the given depth (depth <= depth(v)).
  Node ancestor_at_depth(Node v, std::uint32_t depth) const;
  // f_a(v): index of the child of a whose subtree contains v. a must be a
  // strict ancestor of v.
  std::uint32_t direction(Node a, Node v) const;

  // Neveu word of v, e.g. "1.2.1"; the root is the empty word.
  std::string word(Node v) const;

  friend bool operator==(const PlanarTree& a, const PlanarTree& b) {
    return a.child_counts_ == b.child_counts_;
  }

 private:
  std::vector<std::uint32_t> child_counts_;
  std::vector<Node> parent_;
  std::vector<std::uint32_t> depth_;
  std::vector<std::uint32_t> child_index_;
  std::vector<std::uint32_t> subtree_size_;
  std::vector<std::uint32_t> child_offset_;
  std::vector<Node> children_;
  std::uint32_t max_degree_ = 0;
  std::uint32_t height_ = 0;
};

struct LabeledTree {
  PlanarTree tree;
  std::vector<double> labels;  // labels[root] == 0
};

// Depth-first walk F_T(0..2n): starts and ends at the root, moves along one
// edge per step.
std::vector<Node> depth_first_walk(const PlanarTree& t);

struct Encodings {
  std::vector<std::uint32_t> height;     // H(k) = |u(k)|, k in [0, n]
  std::vector<std::uint32_t> contour;    // Ĥ(i) = |F_T(i)|, i in [0, 2n]
  std::vector<std::uint32_t> first_visit;  // m(k): first walk time at u(k)
};

Encodings encodings(const PlanarTree& t);

}  // namespace gwsnake
