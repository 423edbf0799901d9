#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gwsnake/distributions.hpp"
#include "gwsnake/lineage.hpp"
#include "gwsnake/rational.hpp"
#include "gwsnake/tree.hpp"

namespace gwsnake {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// Every tree with n edges whose degrees lie in the support of mu, in
// lexicographic order of child-count sequences, with weight prod mu_{c_u}.
struct EnumeratedEnsemble {
  std::size_t n_edges = 0;
  std::uint32_t max_degree = 0;
  std::vector<PlanarTree> trees;
  std::vector<Rational> weights;
  Rational total;

  Rational conditional(std::size_t i) const { return weights[i] / total; }
};

// Throws BudgetError once more than `cap` trees would be produced.
EnumeratedEnsemble enumerate(const OffspringDistribution& mu, std::size_t n_edges,
                             std::uint64_t cap = kDefaultEnumerationCap);

// P(|f_k| = nodes) summed over every forest of k trees with that many nodes.
Rational enumerated_forest_probability(const OffspringDistribution& mu, std::uint32_t roots,
                                       std::size_t nodes, std::uint64_t cap = kDefaultEnumerationCap);

// Every a in N^{I_K} with sum a == h.
std::vector<LineageVector> lineage_vectors_of_total(std::uint32_t max_degree, std::uint64_t h);

// Closed-form law of the lineage of u(m) under the size-conditioned measure,
// with walk laws cached up to a fixed size.
class LineageLaw {
 public:
  LineageLaw(const OffspringDistribution& mu, std::size_t max_edges);

  const OffspringDistribution& mu() const { return mu_; }
  // Q_h(a) P(|f_{N1}| = m - h) P(|f_{1+N2}| = n + 1 - m) / P(|T| = n + 1), h = sum a.
  Rational formula(std::size_t n, std::size_t m, const LineageVector& a) const;
  // P(|u(m)| = h) for h = 0..m.
  std::map<std::uint64_t, Rational> depth_law(std::size_t n, std::size_t m) const;
  // 1/2 sum over a of |formula(a) - Q_{|a|}(a) depth_law(|a|)|.
  Rational tv_distance(std::size_t n, std::size_t m) const;

 private:
  OffspringDistribution mu_;
  WalkTable walks_;
};

Rational lineage_law_formula(const OffspringDistribution& mu, std::size_t n, std::size_t m,
                             const LineageVector& a);
std::map<std::uint64_t, Rational> depth_law(const OffspringDistribution& mu, std::size_t n,
                                            std::size_t m);
// Law of (A*, h) with A* ~ Q_h given the depth, keyed by (a, h).
std::map<std::pair<LineageVector, std::uint64_t>, Rational> comparison_law(
    const OffspringDistribution& mu, std::size_t n, std::size_t m);
Rational tv_distance(const OffspringDistribution& mu, std::size_t n, std::size_t m);

// Enumeration side: P_n(A_{u(m)} = a) for every a that occurs.
std::map<LineageVector, Rational> enumerated_lineage_law(const EnumeratedEnsemble& ensemble,
                                                         std::size_t m);

struct IdentityCheck {
  std::string name;
  std::uint64_t instances = 0;
  bool passed = true;
  std::string counterexample;  // first failure, empty on success
};

struct VerificationReport {
  std::vector<IdentityCheck> checks;
  bool all_passed() const;
  const IdentityCheck& find(const std::string& name) const;
};

using LineageFn = std::function<LineageVector(const PlanarTree&, Node, std::uint32_t)>;

struct VerifyOptions {
  std::size_t max_edges = 7;
  std::uint32_t kappa = 3;
  std::size_t otter_max_nodes = 8;
  std::uint32_t otter_max_roots = 3;
  bool lineage_law = true;
  std::uint64_t cap = kDefaultEnumerationCap;
  // Lineage used on the identity side of the branch-content check; tests
  // swap in a corrupted one.
  LineageFn lineage_fn;
};

VerificationReport verify_identities(const OffspringDistribution& mu,
                                     const VerifyOptions& options = {});

}  // namespace gwsnake
