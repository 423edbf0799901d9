#include "gwsnake/lineage.hpp"

#include <numeric>

#include "gwsnake/error.hpp"

namespace gwsnake {

std::pair<std::uint32_t, std::uint32_t> TypeIndex::pair(std::size_t index) {
  std::uint32_t k = 1;
  while (size(k) <= index) ++k;
  return {k, static_cast<std::uint32_t>(index - size(k - 1) + 1)};
}

std::uint64_t LineageVector::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::string LineageVector::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] == 0) continue;
    auto [k, j] = TypeIndex::pair(i);
    if (out.size() > 1) out += ',';
    out += '(' + std::to_string(k) + ',' + std::to_string(j) + "):" + std::to_string(counts_[i]);
  }
  return out + '}';
}

LineageVector lineage(const PlanarTree& t, Node v, std::uint32_t max_degree,
                      std::optional<std::uint32_t> window) {
  if (v >= t.size()) {
    throw UsageError("node " + std::to_string(v) + " out of range for a tree with " +
                     std::to_string(t.size()) + " nodes");
  }
  if (window && *window > t.depth(v)) {
    throw UsageError("lineage window " + std::to_string(*window) + " exceeds depth " +
                     std::to_string(t.depth(v)));
  }
  LineageVector a(max_degree);
  std::uint32_t distance = 0;
  for (Node w = v; w != 0; w = t.parent(w)) {
    if (window && ++distance > *window) break;
    const Node p = t.parent(w);
    const std::uint32_t k = t.child_count(p);
    if (k > max_degree) {
      throw UsageError("node " + std::to_string(p) + " has " + std::to_string(k) +
                       " children, more than K = " + std::to_string(max_degree));
    }
    ++a.at(k, t.child_index(w));
  }
  return a;
}

SideCounts side_counts(const LineageVector& a) {
  SideCounts s{0, 0};
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    auto [k, j] = TypeIndex::pair(i);
    s.left += (j - 1) * a[i];
    s.right += (k - j) * a[i];
  }
  return s;
}

}  // namespace gwsnake
