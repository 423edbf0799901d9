#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gwsnake/lineage.hpp"
#include "gwsnake/rational.hpp"

namespace gwsnake {

enum class Criticality { kEnforce, kUnchecked };

// Offspring law mu on {0..K}. Built either from exact rationals (oracle
// mode; floats are derived) or from doubles (Monte Carlo mode).
class OffspringDistribution {
 public:
  static OffspringDistribution exact(std::vector<Rational> probs,
                                     Criticality check = Criticality::kEnforce);
  static OffspringDistribution floating(std::vector<double> probs,
                                        Criticality check = Criticality::kEnforce);

  // Shorthands for the two reference laws: 1/2 (delta_0 + delta_2) and (1/4, 1/2, 1/4).
  static OffspringDistribution binary();
  static OffspringDistribution three_point();

  bool is_exact() const { return exact_.has_value(); }
  // Throws ModelError when the law was built from floats.
  const std::vector<Rational>& exact_probs() const;
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t k) const { return k < probs_.size() ? probs_[k] : 0.0; }

  std::uint32_t max_degree() const { return static_cast<std::uint32_t>(probs_.size() - 1); }
  // d = gcd{k >= 1 : mu_k > 0}.
  std::uint32_t span() const { return span_; }
  double mean() const { return mean_; }
  double variance() const { return variance_; }
  Rational exact_variance() const;
  bool in_support(std::size_t k) const { return k < probs_.size() && probs_[k] > 0.0; }

 private:
  OffspringDistribution() = default;
  void finish(Criticality check);

  std::optional<std::vector<Rational>> exact_;
  std::vector<double> probs_;
  std::uint32_t span_ = 1;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

struct DisplacementAtom {
  std::vector<Rational> shift;  // one coordinate per child
  Rational prob;
  std::vector<double> shift_d;
  double prob_d = 0.0;
};

// Finite-support displacement laws nu_k on R^k, one per arity.
class DisplacementFamily {
 public:
  DisplacementFamily() = default;

  // Probabilities per arity must sum to 1 and vectors must have k entries.
  // With exact = false the rational fields are ignored and the family is
  // flagged as floating.
  void set(std::uint32_t arity, std::vector<DisplacementAtom> atoms, bool exact);
  // Convenience for tests: coordinates and probabilities given exactly.
  void set_exact(std::uint32_t arity,
                 const std::vector<std::pair<std::vector<Rational>, Rational>>& atoms);

  bool covers(std::uint32_t arity) const { return laws_.count(arity) != 0; }
  const std::vector<DisplacementAtom>& atoms(std::uint32_t arity) const;
  const std::map<std::uint32_t, std::vector<DisplacementAtom>>& laws() const { return laws_; }
  bool is_exact() const { return exact_; }

 private:
  std::map<std::uint32_t, std::vector<DisplacementAtom>> laws_;
  bool exact_ = true;
};

template <typename Scalar>
struct BasicMomentSummary {
  std::uint32_t max_degree = 0;
  std::vector<Scalar> mean_kj;     // m_{k,j}, flattened over I_K
  std::vector<Scalar> var_kj;      // sigma^2_{k,j}
  std::vector<Scalar> second_kj;   // E[Y_{k,j}^2]
  Scalar global_mean{};            // sum mu_k m_{k,j}
  Scalar global_second{};          // beta^2 = sum mu_k E[Y_{k,j}^2]
  Scalar sigma2_mu{};
  std::uint32_t span = 1;
  bool globally_centered = false;  // global mean == 0
  bool degenerate = false;         // beta^2 == 0
};

using MomentSummary = BasicMomentSummary<double>;
using ExactMomentSummary = BasicMomentSummary<Rational>;

// Throws ModelError when nu misses an arity charged by mu.
MomentSummary moments(const OffspringDistribution& mu, const DisplacementFamily& nu);
ExactMomentSummary exact_moments(const OffspringDistribution& mu, const DisplacementFamily& nu);

// Q_h(a): multinomial law with parameter h and p_{k,j} = mu_k on I_K.
Rational multinomial_pmf(std::uint64_t h, const OffspringDistribution& mu, const LineageVector& a);
double multinomial_pmf_float(std::uint64_t h, const OffspringDistribution& mu,
                             const LineageVector& a);

// Law of W_n, the walk with increments xi - 1, xi ~ mu.
template <typename Scalar>
struct BasicWalkLaw {
  std::uint64_t steps = 0;
  std::int64_t min_value = 0;  // -steps
  std::vector<Scalar> pmf;     // pmf[i] = P(W_n = min_value + i)

  Scalar at(std::int64_t l) const {
    const std::int64_t i = l - min_value;
    if (i < 0 || i >= static_cast<std::int64_t>(pmf.size())) return Scalar(0);
    return pmf[static_cast<std::size_t>(i)];
  }
};

using WalkLaw = BasicWalkLaw<double>;
using ExactWalkLaw = BasicWalkLaw<Rational>;

ExactWalkLaw walk_pmf(const OffspringDistribution& mu, std::uint64_t steps);
WalkLaw walk_pmf_float(const OffspringDistribution& mu, std::uint64_t steps);

// Laws of W_0..W_max computed by successive convolution, cached for reuse by
// the forest-size formula.
class WalkTable {
 public:
  WalkTable(const OffspringDistribution& mu, std::uint64_t max_steps);
  const ExactWalkLaw& law(std::uint64_t steps) const { return laws_.at(steps); }
  std::uint64_t max_steps() const { return laws_.size() - 1; }

  // P(|f_k| = n) for a forest of k i.i.d. GW trees: (k/n) P(W_n = -k) when
  // 1 <= k <= n, 0 when n < k, and the empty forest has size 0 a.s.
  Rational forest_size_pmf(std::uint64_t k, std::uint64_t nodes) const;
  Rational tree_size_pmf(std::uint64_t nodes) const { return forest_size_pmf(1, nodes); }

 private:
  std::vector<ExactWalkLaw> laws_;
};

Rational forest_size_pmf(const OffspringDistribution& mu, std::uint64_t k, std::uint64_t nodes);
Rational tree_size_pmf(const OffspringDistribution& mu, std::uint64_t nodes);

// sup over the lattice -n + dN of |(sqrt(n)/d) P(W_n = l) - gaussian(l)|.
double clt_gap(const OffspringDistribution& mu, std::uint64_t steps);

// (N1(a), N2(a)) both within sigma^2 h / 2 +- h^(2/3). Requires sum a == h.
bool jh_membership(const LineageVector& a, std::uint64_t h, const OffspringDistribution& mu);

}  // namespace gwsnake
