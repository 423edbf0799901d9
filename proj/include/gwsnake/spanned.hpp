#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gwsnake/lineage.hpp"
#include "gwsnake/tree.hpp"

namespace gwsnake {

// A path (top, bottom) of the spanned subtree between two consecutive
// distinguished nodes, top being an ancestor of bottom.
struct SpannedBranch {
  Node top;
  Node bottom;
  std::uint32_t length;   // number of nodes strictly between top and bottom
  LineageVector content;  // typed counts of those interior nodes, w.r.t. bottom
};

// Branching data for a distinguished node with distinguished descendants:
// its arity and the child indices leading to them, increasing.
struct BranchingRecord {
  Node node;
  std::uint32_t arity;
  std::vector<std::uint32_t> directions;
};

// Decomposition of a tree along the subtree spanned by the root and a list
// of marked nodes u_1 < ... < u_kappa.
//
// Gaps are numbered l = 0..kappa: gap 0 holds the nodes visited before u_1,
// gap l >= 1 the nodes visited from u_l (included) up to u_{l+1} (excluded,
// or the end of the walk for l = kappa). The forest roots of a gap are the
// marked node u_l (l >= 1) together with every unmarked node outside the
// spanned subtree whose father lies on the spanned subtree but is not one of
// its leaves.
struct SpannedDecomposition {
  std::uint32_t max_degree = 0;
  std::vector<Node> marked;     // u_1..u_kappa
  std::vector<Node> branching;  // deepest common ancestors of consecutive marked nodes
  std::vector<Node> distinguished;  // root, marked and branching nodes, increasing
  PlanarTree shape;                 // shape node i corresponds to distinguished[i]
  std::vector<Node> shape_of_marked;  // phi(u_l), l = 1..kappa
  // Branches ordered by their lower end; branches[i] ends at shape node i+1.
  std::vector<SpannedBranch> branches;
  // Internal distinguished nodes, increasing; theta[i].directions has one
  // entry per shape child.
  std::vector<BranchingRecord> theta;
  // Per gap, counted directly on the tree.
  std::vector<std::uint64_t> sub_counts;
  std::vector<std::uint64_t> fringe_sizes;

  std::size_t kappa() const { return marked.size(); }
  // phi: distinguished node -> shape node. Throws if v is not distinguished.
  Node phi(Node v) const;
  const BranchingRecord& theta_of_shape(Node shape_node) const;
};

// Requires 1 <= kappa, marked strictly increasing in (0, n]. Throws
// UsageError otherwise (in particular when the root is passed).
SpannedDecomposition spanned_decomposition(const PlanarTree& t, std::span<const Node> marked,
                                           std::uint32_t max_degree);

// #Sub_l rebuilt from the shape, the branch contents and the branching data
// only (N + Y split). One entry per gap.
std::vector<std::int64_t> sub_counts_from_shape(const SpannedDecomposition& d);

// F_l rebuilt from the marked ranks, the shape and the branch lengths only.
std::vector<std::int64_t> fringe_sizes_from_heights(const SpannedDecomposition& d,
                                                     std::size_t n_edges);

}  // namespace gwsnake
