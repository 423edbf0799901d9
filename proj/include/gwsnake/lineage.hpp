#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gwsnake/tree.hpp"

namespace gwsnake {

// The index set I_K = {(k, j) : 1 <= j <= k <= K}, flattened in the order
// (1,1), (2,1), (2,2), (3,1), ...
struct TypeIndex {
  static constexpr std::size_t size(std::uint32_t max_degree) {
    return static_cast<std::size_t>(max_degree) * (max_degree + 1) / 2;
  }
  static constexpr std::size_t flat(std::uint32_t k, std::uint32_t j) {
    return static_cast<std::size_t>(k - 1) * k / 2 + (j - 1);
  }
  // Inverse of flat().
  static std::pair<std::uint32_t, std::uint32_t> pair(std::size_t index);
};

// Counts of typed ancestors (A_{u,k,j}) over I_K.
class LineageVector {
 public:
  LineageVector() = default;
  explicit LineageVector(std::uint32_t max_degree)
      : max_degree_(max_degree), counts_(TypeIndex::size(max_degree), 0) {}

  std::uint32_t max_degree() const { return max_degree_; }
  std::size_t dimension() const { return counts_.size(); }

  std::uint64_t operator()(std::uint32_t k, std::uint32_t j) const {
    return counts_[TypeIndex::flat(k, j)];
  }
  std::uint64_t& at(std::uint32_t k, std::uint32_t j) { return counts_[TypeIndex::flat(k, j)]; }
  std::uint64_t operator[](std::size_t flat) const { return counts_[flat]; }
  std::uint64_t& operator[](std::size_t flat) { return counts_[flat]; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

  std::uint64_t total() const;

  // "{(2,1):2,(2,2):1}", zero entries omitted.
  std::string to_string() const;

  auto operator<=>(const LineageVector&) const = default;

 private:
  std::uint32_t max_degree_ = 0;
  std::vector<std::uint64_t> counts_;
};

// Lineage of v: for each (k, j), the number of strict ancestors w with
// c_w = k and v below the j-th child of w. With `window`, only the ancestors
// at distance <= window from v are counted. Requires max_degree >= every
// child count on the ancestral line.
LineageVector lineage(const PlanarTree& t, Node v, std::uint32_t max_degree,
                      std::optional<std::uint32_t> window = std::nullopt);

struct SideCounts {
  std::uint64_t left;   // N1 = sum (j - 1) a_{k,j}
  std::uint64_t right;  // N2 = sum (k - j) a_{k,j}
  friend bool operator==(const SideCounts&, const SideCounts&) = default;
};

SideCounts side_counts(const LineageVector& a);

}  // namespace gwsnake
