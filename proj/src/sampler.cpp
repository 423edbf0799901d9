#include "gwsnake/sampler.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "gwsnake/error.hpp"

namespace gwsnake {

void check_attainable(const OffspringDistribution& mu, std::uint64_t n_edges) {
  const std::uint32_t d = mu.span();
  if (n_edges % d != 0) {
    throw ModelError("no tree with " + std::to_string(n_edges) + " edges: offspring span d = " +
                     std::to_string(d) + " requires n divisible by d");
  }
  if (!mu.in_support(0)) throw ModelError("mu_0 = 0: finite trees are impossible");
  // n edges are reachable iff n is a sum of positive supported degrees.
  std::vector<char> reach(n_edges + 1, 0);
  reach[0] = 1;
  for (std::uint64_t v = 1; v <= n_edges; ++v) {
    for (std::uint32_t k = 1; k <= mu.max_degree() && k <= v; ++k) {
      if (mu.in_support(k) && reach[v - k]) {
        reach[v] = 1;
        break;
      }
    }
  }
  if (!reach[n_edges]) {
    throw ModelError("no tree with " + std::to_string(n_edges) +
                     " edges under the support of mu (span d = " + std::to_string(d) + ")");
  }
}

std::vector<std::uint32_t> cycle_shift(std::span<const std::uint32_t> seq) {
  std::int64_t sum = 0, best = 0;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    sum += static_cast<std::int64_t>(seq[i]) - 1;
    if (i == 0 || sum < best) {
      best = sum;
      arg = i;
    }
  }
  if (sum != -1) throw InvalidSequenceError("cycle shift needs sum(c - 1) = -1", seq.size());
  std::vector<std::uint32_t> out(seq.size());
  const std::size_t start = (arg + 1) % seq.size();
  std::rotate_copy(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(start), seq.end(),
                   out.begin());
  return out;
}

PlanarTree sample_conditioned_tree(const OffspringDistribution& mu, std::uint64_t n_edges, Rng& rng,
                                   const SamplerOptions& options) {
  check_attainable(mu, n_edges);
  const std::uint64_t nodes = n_edges + 1;
  const auto p = mu.probs();
  const std::uint32_t K = mu.max_degree();

  // Conditional split probabilities for sequential binomials.
  std::vector<double> split(K + 1, 0.0);
  double rest = 1.0;
  for (std::uint32_t k = 0; k <= K; ++k) {
    split[k] = rest > 0.0 ? std::min(1.0, p[k] / rest) : 0.0;
    rest -= p[k];
  }

  std::vector<std::uint64_t> counts(K + 1, 0);
  std::uint64_t attempts = 0;
  for (;;) {
    if (attempts == options.max_attempts) {
      throw BudgetError("conditioned sampling gave up after " + std::to_string(attempts) +
                            " rejected count vectors",
                        attempts);
    }
    ++attempts;
    std::uint64_t left = nodes;
    std::int64_t excess = 0;
    for (std::uint32_t k = 0; k <= K; ++k) {
      std::uint64_t c = 0;
      if (k == K || split[k] >= 1.0) {
        c = left;
      } else if (split[k] > 0.0 && left > 0) {
        std::binomial_distribution<std::uint64_t> bin(left, split[k]);
        c = bin(rng);
      }
      counts[k] = c;
      left -= c;
      excess += (static_cast<std::int64_t>(k) - 1) * static_cast<std::int64_t>(c);
      if (left == 0) {
        std::fill(counts.begin() + k + 1, counts.end(), 0);
        break;
      }
    }
    if (excess == -1) break;
  }

  std::vector<std::uint32_t> seq;
  seq.reserve(nodes);
  for (std::uint32_t k = 0; k <= K; ++k) seq.insert(seq.end(), counts[k], k);
  for (std::size_t i = seq.size(); i > 1; --i) std::swap(seq[i - 1], seq[rng.below(i)]);
  const auto shifted = cycle_shift(seq);
  return PlanarTree::from_child_counts(shifted);
}

PlanarTree sample_conditioned_tree(const OffspringDistribution& mu, std::uint64_t n_edges,
                                   SeedSpec seed, const SamplerOptions& options) {
  Rng rng(seed);
  return sample_conditioned_tree(mu, n_edges, rng, options);
}

LabeledTree assign_labels(const PlanarTree& t, const DisplacementFamily& nu, Rng& rng) {
  std::map<std::uint32_t, std::vector<double>> cdf;
  for (Node v = 0; v < t.size(); ++v) {
    const std::uint32_t k = t.child_count(v);
    if (k == 0 || cdf.count(k)) continue;
    if (!nu.covers(k)) {
      throw ModelError("no displacement law for arity " + std::to_string(k) + " (node " +
                       std::to_string(v) + ")");
    }
    std::vector<double> c;
    double acc = 0.0;
    for (const auto& atom : nu.atoms(k)) c.push_back(acc += atom.prob_d);
    cdf.emplace(k, std::move(c));
  }

  LabeledTree out{t, std::vector<double>(t.size(), 0.0)};
  const std::vector<double>* table = nullptr;
  const std::vector<DisplacementAtom>* atoms = nullptr;
  std::uint32_t table_arity = 0;
  for (Node v = 0; v < t.size(); ++v) {
    const std::uint32_t k = t.child_count(v);
    if (k == 0) continue;
    if (k != table_arity) {
      table = &cdf.at(k);
      atoms = &nu.atoms(k);
      table_arity = k;
    }
    std::size_t pick = 0;
    if (atoms->size() > 1) {
      const double x = rng.uniform() * table->back();
      pick = static_cast<std::size_t>(std::upper_bound(table->begin(), table->end(), x) -
                                      table->begin());
      pick = std::min(pick, atoms->size() - 1);
    }
    const auto& shift = (*atoms)[pick].shift_d;
    for (std::uint32_t j = 1; j <= k; ++j) out.labels[t.child(v, j)] = out.labels[v] + shift[j - 1];
  }
  return out;
}

LabeledTree assign_labels(const PlanarTree& t, const DisplacementFamily& nu, SeedSpec seed) {
  Rng rng(seed);
  return assign_labels(t, nu, rng);
}

}  // namespace gwsnake
