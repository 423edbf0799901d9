#include "gwsnake/spanned.hpp"

#include <algorithm>

#include "gwsnake/error.hpp"

namespace gwsnake {

Node SpannedDecomposition::phi(Node v) const {
  auto it = std::lower_bound(distinguished.begin(), distinguished.end(), v);
  if (it == distinguished.end() || *it != v) {
    throw UsageError("node " + std::to_string(v) + " is not a distinguished node");
  }
  return static_cast<Node>(it - distinguished.begin());
}

const BranchingRecord& SpannedDecomposition::theta_of_shape(Node shape_node) const {
  const Node v = distinguished[shape_node];
  auto it = std::lower_bound(theta.begin(), theta.end(), v,
                             [](const BranchingRecord& r, Node x) { return r.node < x; });
  if (it == theta.end() || it->node != v) {
    throw UsageError("shape node " + std::to_string(shape_node) + " has no branching record");
  }
  return *it;
}

SpannedDecomposition spanned_decomposition(const PlanarTree& t, std::span<const Node> marked,
                                           std::uint32_t max_degree) {
  const std::size_t n = t.edges();
  if (marked.empty()) throw UsageError("spanned decomposition needs at least one marked node");
  for (std::size_t i = 0; i < marked.size(); ++i) {
    if (marked[i] == 0) {
      throw UsageError("the root cannot be marked: it is u_0 by convention");
    }
    if (marked[i] > n) {
      throw UsageError("marked node " + std::to_string(marked[i]) + " out of range");
    }
    if (i > 0 && marked[i] <= marked[i - 1]) {
      throw UsageError("marked nodes must be strictly increasing");
    }
  }
  if (t.max_degree() > max_degree) {
    throw UsageError("tree degree " + std::to_string(t.max_degree()) + " exceeds K = " +
                     std::to_string(max_degree));
  }

  SpannedDecomposition d;
  d.max_degree = max_degree;
  d.marked.assign(marked.begin(), marked.end());
  for (std::size_t i = 0; i + 1 < marked.size(); ++i) {
    d.branching.push_back(t.common_ancestor(marked[i], marked[i + 1]));
  }
  std::sort(d.branching.begin(), d.branching.end());
  d.branching.erase(std::unique(d.branching.begin(), d.branching.end()), d.branching.end());

  d.distinguished.push_back(0);
  d.distinguished.insert(d.distinguished.end(), marked.begin(), marked.end());
  d.distinguished.insert(d.distinguished.end(), d.branching.begin(), d.branching.end());
  std::sort(d.distinguished.begin(), d.distinguished.end());
  d.distinguished.erase(std::unique(d.distinguished.begin(), d.distinguished.end()),
                        d.distinguished.end());

  // Shape: father of a distinguished node is its deepest distinguished strict ancestor.
  const std::size_t m = d.distinguished.size();
  std::vector<std::uint32_t> shape_counts(m, 0);
  std::vector<Node> shape_parent(m, kNoParent);
  std::vector<Node> stack{0};
  for (Node x = 1; x < m; ++x) {
    while (!t.is_ancestor_or_self(d.distinguished[stack.back()], d.distinguished[x])) {
      stack.pop_back();
    }
    shape_parent[x] = stack.back();
    ++shape_counts[stack.back()];
    stack.push_back(x);
  }
  d.shape = PlanarTree::from_child_counts(shape_counts);
  for (Node u : d.marked) d.shape_of_marked.push_back(d.phi(u));

  for (Node x = 1; x < m; ++x) {
    const Node top = d.distinguished[shape_parent[x]];
    const Node bottom = d.distinguished[x];
    SpannedBranch b{top, bottom, t.depth(bottom) - t.depth(top) - 1, LineageVector(max_degree)};
    for (Node prev = bottom, w = t.parent(bottom); w != top; prev = w, w = t.parent(w)) {
      ++b.content.at(t.child_count(w), t.child_index(prev));
    }
    d.branches.push_back(std::move(b));
  }

  for (Node z = 0; z < m; ++z) {
    if (d.shape.child_count(z) == 0) continue;
    const Node v = d.distinguished[z];
    BranchingRecord r{v, t.child_count(v), {}};
    for (Node x : d.shape.children(z)) r.directions.push_back(t.direction(v, d.distinguished[x]));
    d.theta.push_back(std::move(r));
  }

  // Direct count of forest roots and forest sizes per gap.
  const std::size_t kappa = marked.size();
  std::vector<char> spanned(n + 1, 0);
  std::vector<char> spanned_leaf(n + 1, 0);
  for (Node u : marked) {
    for (Node w = u;; w = t.parent(w)) {
      if (spanned[w]) break;
      spanned[w] = 1;
      if (w == 0) break;
    }
  }
  for (std::size_t l = 0; l < kappa; ++l) {
    const bool has_marked_below = l + 1 < kappa && t.is_ancestor_or_self(marked[l], marked[l + 1]);
    spanned_leaf[marked[l]] = !has_marked_below;
  }
  d.sub_counts.assign(kappa + 1, 0);
  d.fringe_sizes.assign(kappa + 1, 0);
  std::size_t gap = 0;
  for (Node w = 0; w <= n; ++w) {
    while (gap < kappa && marked[gap] <= w) ++gap;
    if (gap > 0 && w == marked[gap - 1]) {
      ++d.sub_counts[gap];
      d.fringe_sizes[gap] += spanned_leaf[w] ? t.subtree_size(w) : 1;
    } else if (w != 0 && !spanned[w] && spanned[t.parent(w)] && !spanned_leaf[t.parent(w)]) {
      ++d.sub_counts[gap];
      d.fringe_sizes[gap] += t.subtree_size(w);
    }
  }
  return d;
}

namespace {

Node shape_common_ancestor(const PlanarTree& s, Node a, Node b) { return s.common_ancestor(a, b); }

// Direction at shape node z toward shape node y (a strict shape descendant).
std::int64_t shape_direction(const SpannedDecomposition& d, Node z, Node y) {
  const Node child = d.shape.ancestor_at_depth(y, d.shape.depth(z) + 1);
  return d.theta_of_shape(z).directions[d.shape.child_index(child) - 1];
}

std::int64_t arity(const SpannedDecomposition& d, Node z) { return d.theta_of_shape(z).arity; }

}  // namespace

std::vector<std::int64_t> sub_counts_from_shape(const SpannedDecomposition& d) {
  const std::size_t kappa = d.kappa();
  const PlanarTree& s = d.shape;
  std::vector<std::int64_t> out(kappa + 1, 0);
  for (std::size_t l = 0; l <= kappa; ++l) {
    const bool first = l == 0;
    const bool last = l == kappa;
    const Node a = first ? 0 : d.shape_of_marked[l - 1];
    const Node top = (first || last) ? 0 : shape_common_ancestor(s, a, d.shape_of_marked[l]);

    std::int64_t subtrees_on_branches = 0;
    std::int64_t subtrees_at_branchings = first ? 0 : 1;

    const std::int64_t from = a == top ? 0 : shape_direction(d, top, a);
    const std::int64_t to = last ? arity(d, top) + 1 : shape_direction(d, top, d.shape_of_marked[l]);
    subtrees_at_branchings += to - from - 1;

    // Climb from u_l to the common ancestor: right-hand subtrees.
    for (Node x = a; x != top; x = s.parent(x)) {
      subtrees_on_branches += static_cast<std::int64_t>(side_counts(d.branches[x - 1].content).right);
      const Node p = s.parent(x);
      if (p != top) subtrees_at_branchings += arity(d, p) - shape_direction(d, p, a);
    }
    // Descend to u_{l+1}: left-hand subtrees.
    if (!last) {
      const Node b = d.shape_of_marked[l];
      for (Node x = b; x != top; x = s.parent(x)) {
        subtrees_on_branches += static_cast<std::int64_t>(side_counts(d.branches[x - 1].content).left);
        const Node p = s.parent(x);
        if (p != top) subtrees_at_branchings += shape_direction(d, p, b) - 1;
      }
    }
    out[l] = subtrees_on_branches + subtrees_at_branchings;
  }
  return out;
}

std::vector<std::int64_t> fringe_sizes_from_heights(const SpannedDecomposition& d,
                                                     std::size_t n_edges) {
  const std::size_t kappa = d.kappa();
  const PlanarTree& s = d.shape;
  std::vector<std::int64_t> out(kappa + 1, 0);
  for (std::size_t l = 0; l <= kappa; ++l) {
    const std::int64_t from_rank = l == 0 ? 0 : d.marked[l - 1];
    const std::int64_t to_rank = l == kappa ? static_cast<std::int64_t>(n_edges) : d.marked[l];
    std::int64_t descent = 0;  // |u_{l+1}| - |common ancestor|
    if (l < kappa) {
      const Node b = d.shape_of_marked[l];
      const Node top = l == 0 ? 0 : s.common_ancestor(d.shape_of_marked[l - 1], b);
      for (Node x = b; x != top; x = s.parent(x)) descent += d.branches[x - 1].length + 1;
    }
    out[l] = (to_rank - from_rank + 1) - descent - (l == 0 ? 1 : 0);
  }
  return out;
}

}  // namespace gwsnake
