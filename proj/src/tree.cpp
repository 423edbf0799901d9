#include "gwsnake/tree.hpp"

#include <algorithm>
#include <utility>

#include "gwsnake/error.hpp"

namespace gwsnake {

PlanarTree PlanarTree::from_child_counts(std::span<const std::uint32_t> seq) {
  if (seq.empty()) {
    throw InvalidSequenceError("empty child-count sequence", 0);
  }
  const std::size_t count = seq.size();
  std::int64_t partial = 0;
  for (std::size_t i = 0; i < count; ++i) {
    partial += static_cast<std::int64_t>(seq[i]) - 1;
    const bool last = i + 1 == count;
    if ((!last && partial <= -1) || (last && partial != -1)) {
      throw InvalidSequenceError(
          "not a Lukasiewicz sequence: partial sum " + std::to_string(partial) +
              " at index " + std::to_string(i) + (last ? " (must end at -1)" : " (must stay > -1)"),
          i);
    }
  }

  PlanarTree t;
  t.child_counts_.assign(seq.begin(), seq.end());
  t.parent_.assign(count, kNoParent);
  t.depth_.assign(count, 0);
  t.child_index_.assign(count, 0);
  t.subtree_size_.assign(count, 1);
  t.child_offset_.assign(count + 1, 0);
  t.children_.resize(count - 1);

  for (std::size_t v = 0; v < count; ++v) {
    t.child_offset_[v + 1] = t.child_offset_[v] + seq[v];
    t.max_degree_ = std::max(t.max_degree_, seq[v]);
  }

  // Open nodes and how many of their children are still to come.
  std::vector<std::pair<Node, std::uint32_t>> open;
  if (seq[0] > 0) open.emplace_back(0, seq[0]);
  std::vector<std::uint32_t> filled(count, 0);
  for (Node v = 1; v < count; ++v) {
    auto& [p, remaining] = open.back();
    t.parent_[v] = p;
    t.depth_[v] = t.depth_[p] + 1;
    t.child_index_[v] = seq[p] - remaining + 1;
    t.children_[t.child_offset_[p] + filled[p]++] = v;
    t.height_ = std::max(t.height_, t.depth_[v]);
    if (--remaining == 0) open.pop_back();
    if (seq[v] > 0) open.emplace_back(v, seq[v]);
  }
  for (Node v = static_cast<Node>(count - 1); v > 0; --v) {
    t.subtree_size_[t.parent_[v]] += t.subtree_size_[v];
  }
  return t;
}

Node PlanarTree::common_ancestor(Node a, Node b) const {
  while (depth_[a] > depth_[b]) a = parent_[a];
  while (depth_[b] > depth_[a]) b = parent_[b];
  while (a != b) {
    a = parent_[a];
    b = parent_[b];
  }
  return a;
}

Node PlanarTree::ancestor_at_depth(Node v, std::uint32_t d) const {
  while (depth_[v] > d) v = parent_[v];
  return v;
}

std::uint32_t PlanarTree::direction(Node a, Node v) const {
  return child_index_[ancestor_at_depth(v, depth_[a] + 1)];
}

std::string PlanarTree::word(Node v) const {
  std::vector<std::uint32_t> letters;
  for (Node w = v; w != 0; w = parent_[w]) letters.push_back(child_index_[w]);
  std::string out;
  for (auto it = letters.rbegin(); it != letters.rend(); ++it) {
    if (!out.empty()) out += '.';
    out += std::to_string(*it);
  }
  return out;
}

namespace {

// Appends the walk and records the first visit time of every node.
void walk_into(const PlanarTree& t, std::vector<Node>& walk, std::vector<std::uint32_t>* first) {
  const std::size_t n = t.edges();
  walk.clear();
  walk.reserve(2 * n + 1);
  walk.push_back(0);
  if (first) {
    first->assign(n + 1, 0);
  }
  for (Node v = 1; v <= n; ++v) {
    const Node p = t.parent(v);
    while (walk.back() != p) walk.push_back(t.parent(walk.back()));
    if (first) (*first)[v] = static_cast<std::uint32_t>(walk.size());
    walk.push_back(v);
  }
  while (walk.back() != 0) walk.push_back(t.parent(walk.back()));
}

}  // namespace

std::vector<Node> depth_first_walk(const PlanarTree& t) {
  std::vector<Node> walk;
  walk_into(t, walk, nullptr);
  return walk;
}

Encodings encodings(const PlanarTree& t) {
  Encodings e;
  std::vector<Node> walk;
  walk_into(t, walk, &e.first_visit);
  e.height.assign(t.depths().begin(), t.depths().end());
  e.contour.resize(walk.size());
  std::transform(walk.begin(), walk.end(), e.contour.begin(),
                 [&](Node v) { return t.depth(v); });
  return e;
}

}  // namespace gwsnake
