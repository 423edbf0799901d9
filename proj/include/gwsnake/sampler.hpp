#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gwsnake/distributions.hpp"
#include "gwsnake/rng.hpp"
#include "gwsnake/tree.hpp"

namespace gwsnake {

struct SamplerOptions {
  std::uint64_t max_attempts = 100'000'000;  // count-vector rejections
};

// Throws ModelError unless n + 1 nodes is a possible size under mu.
void check_attainable(const OffspringDistribution& mu, std::uint64_t n_edges);

// Rotation of a sequence with sum(c - 1) == -1 that starts right after the
// first index where the partial sums reach their minimum.
std::vector<std::uint32_t> cycle_shift(std::span<const std::uint32_t> seq);

// Exact draw from the GW law conditioned on n_edges + 1 nodes.
PlanarTree sample_conditioned_tree(const OffspringDistribution& mu, std::uint64_t n_edges, Rng& rng,
                                   const SamplerOptions& options = {});
PlanarTree sample_conditioned_tree(const OffspringDistribution& mu, std::uint64_t n_edges,
                                   SeedSpec seed, const SamplerOptions& options = {});

// Draws one displacement vector per internal node from nu_{c_u}.
LabeledTree assign_labels(const PlanarTree& t, const DisplacementFamily& nu, Rng& rng);
LabeledTree assign_labels(const PlanarTree& t, const DisplacementFamily& nu, SeedSpec seed);

}  // namespace gwsnake
