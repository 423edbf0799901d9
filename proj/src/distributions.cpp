#include "gwsnake/distributions.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "gwsnake/error.hpp"

namespace gwsnake {

namespace {

constexpr double kFloatTol = 1e-12;

template <typename Scalar>
void convolve_step(const std::vector<Scalar>& prev, const std::vector<Scalar>& step,
                   std::vector<Scalar>& next) {
  // Value v at index i moves to v + k - 1, i.e. index i + k after the shift
  // of the minimum by -1.
  next.assign(prev.size() + step.size() - 1, Scalar(0));
  for (std::size_t i = 0; i < prev.size(); ++i) {
    if (prev[i] == 0) continue;
    for (std::size_t k = 0; k < step.size(); ++k) {
      if (step[k] == 0) continue;
      next[i + k] += prev[i] * step[k];
    }
  }
}

template <typename Scalar>
BasicWalkLaw<Scalar> walk_law(const std::vector<Scalar>& step, std::uint64_t steps) {
  BasicWalkLaw<Scalar> law;
  law.steps = steps;
  law.min_value = -static_cast<std::int64_t>(steps);
  law.pmf = {Scalar(1)};
  std::vector<Scalar> next;
  for (std::uint64_t s = 0; s < steps; ++s) {
    convolve_step(law.pmf, step, next);
    law.pmf.swap(next);
  }
  return law;
}

}  // namespace

OffspringDistribution OffspringDistribution::exact(std::vector<Rational> probs,
                                                   Criticality check) {
  Rational total = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] < 0) throw ModelError("mu_" + std::to_string(k) + " is negative");
    total += probs[k];
  }
  if (total != 1) throw ModelError("offspring probabilities sum to " + to_string(total) + ", not 1");
  while (probs.size() > 1 && probs.back() == 0) probs.pop_back();

  OffspringDistribution mu;
  mu.probs_.reserve(probs.size());
  for (const auto& p : probs) mu.probs_.push_back(to_double(p));
  if (check == Criticality::kEnforce) {
    Rational mean = 0;
    for (std::size_t k = 0; k < probs.size(); ++k) mean += Rational(static_cast<long>(k)) * probs[k];
    if (mean != 1) throw ModelError("offspring law is not critical: mean " + to_string(mean));
  }
  mu.exact_ = std::move(probs);
  mu.finish(check);
  return mu;
}

OffspringDistribution OffspringDistribution::floating(std::vector<double> probs,
                                                      Criticality check) {
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (!(probs[k] >= 0.0)) throw ModelError("mu_" + std::to_string(k) + " is negative");
    total += probs[k];
  }
  if (std::abs(total - 1.0) > kFloatTol) {
    throw ModelError("offspring probabilities sum to " + std::to_string(total) + ", not 1");
  }
  while (probs.size() > 1 && probs.back() == 0.0) probs.pop_back();

  OffspringDistribution mu;
  mu.probs_ = std::move(probs);
  mu.finish(check);
  if (check == Criticality::kEnforce && std::abs(mu.mean_ - 1.0) > kFloatTol) {
    throw ModelError("offspring law is not critical: mean " + std::to_string(mu.mean_));
  }
  return mu;
}

OffspringDistribution OffspringDistribution::binary() {
  return exact({Rational(1, 2), Rational(0), Rational(1, 2)});
}

OffspringDistribution OffspringDistribution::three_point() {
  return exact({Rational(1, 4), Rational(1, 2), Rational(1, 4)});
}

void OffspringDistribution::finish(Criticality check) {
  if (probs_.empty()) throw ModelError("offspring law has empty support");
  const double p01 = probs_[0] + (probs_.size() > 1 ? probs_[1] : 0.0);
  const bool degenerate =
      exact_ ? (*exact_)[0] + (exact_->size() > 1 ? (*exact_)[1] : Rational(0)) == 1
             : std::abs(p01 - 1.0) <= kFloatTol;
  if (degenerate && check == Criticality::kEnforce) {
    throw ModelError("offspring law is degenerate: mu_0 + mu_1 = 1");
  }
  span_ = 0;
  mean_ = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    if (probs_[k] <= 0.0) continue;
    if (k >= 1) span_ = std::gcd(span_, static_cast<std::uint32_t>(k));
    mean_ += static_cast<double>(k) * probs_[k];
    second += static_cast<double>(k * k) * probs_[k];
  }
  if (span_ == 0) span_ = 1;
  variance_ = exact_ ? to_double(exact_variance()) : second - mean_ * mean_;
}

const std::vector<Rational>& OffspringDistribution::exact_probs() const {
  if (!exact_) throw ModelError("offspring law was given in floating point; exact values needed");
  return *exact_;
}

Rational OffspringDistribution::exact_variance() const {
  const auto& p = exact_probs();
  Rational mean = 0, second = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Rational kk(static_cast<long>(k));
    mean += kk * p[k];
    second += kk * kk * p[k];
  }
  return second - mean * mean;
}

void DisplacementFamily::set(std::uint32_t arity, std::vector<DisplacementAtom> atoms,
                             bool exact) {
  if (arity == 0) throw ModelError("displacement laws are indexed by arity k >= 1");
  if (atoms.empty()) throw ModelError("nu_" + std::to_string(arity) + " has no atoms");
  Rational total = 0;
  double total_d = 0.0;
  for (auto& atom : atoms) {
    if (exact) {
      atom.shift_d.clear();
      for (const auto& x : atom.shift) atom.shift_d.push_back(to_double(x));
      atom.prob_d = to_double(atom.prob);
    }
    if (atom.shift_d.size() != arity) {
      throw ModelError("nu_" + std::to_string(arity) + " atom has " +
                       std::to_string(atom.shift_d.size()) + " coordinates");
    }
    if (atom.prob_d < 0.0) throw ModelError("nu_" + std::to_string(arity) + " has a negative weight");
    total += atom.prob;
    total_d += atom.prob_d;
  }
  if (exact ? total != 1 : std::abs(total_d - 1.0) > kFloatTol) {
    throw ModelError("nu_" + std::to_string(arity) + " probabilities do not sum to 1");
  }
  if (!exact) exact_ = false;
  laws_[arity] = std::move(atoms);
}

void DisplacementFamily::set_exact(
    std::uint32_t arity, const std::vector<std::pair<std::vector<Rational>, Rational>>& atoms) {
  std::vector<DisplacementAtom> out;
  for (const auto& [shift, prob] : atoms) out.push_back({shift, prob, {}, 0.0});
  set(arity, std::move(out), true);
}

const std::vector<DisplacementAtom>& DisplacementFamily::atoms(std::uint32_t arity) const {
  auto it = laws_.find(arity);
  if (it == laws_.end()) throw ModelError("no displacement law for arity " + std::to_string(arity));
  return it->second;
}

namespace {

template <typename Scalar, typename Probs, typename Shift, typename Weight>
BasicMomentSummary<Scalar> moments_impl(const OffspringDistribution& mu,
                                        const DisplacementFamily& nu, const Probs& probs,
                                        Shift shift, Weight weight) {
  BasicMomentSummary<Scalar> s;
  const std::uint32_t K = mu.max_degree();
  s.max_degree = K;
  s.span = mu.span();
  const std::size_t dim = TypeIndex::size(K);
  s.mean_kj.assign(dim, Scalar(0));
  s.var_kj.assign(dim, Scalar(0));
  s.second_kj.assign(dim, Scalar(0));
  for (std::uint32_t k = 1; k <= K; ++k) {
    const bool charged = mu.in_support(k);
    if (!nu.covers(k)) {
      if (charged) throw ModelError("nu_" + std::to_string(k) + " missing for a supported arity");
      continue;
    }
    for (std::uint32_t j = 1; j <= k; ++j) {
      Scalar m(0), m2(0);
      for (const auto& atom : nu.atoms(k)) {
        const Scalar x = shift(atom, j - 1);
        m += weight(atom) * x;
        m2 += weight(atom) * x * x;
      }
      const std::size_t i = TypeIndex::flat(k, j);
      s.mean_kj[i] = m;
      s.second_kj[i] = m2;
      s.var_kj[i] = m2 - m * m;
      s.global_mean += probs[k] * m;
      s.global_second += probs[k] * m2;
    }
  }
  return s;
}

}  // namespace

MomentSummary moments(const OffspringDistribution& mu, const DisplacementFamily& nu) {
  auto s = moments_impl<double>(
      mu, nu, mu.probs(), [](const DisplacementAtom& a, std::size_t j) { return a.shift_d[j]; },
      [](const DisplacementAtom& a) { return a.prob_d; });
  s.sigma2_mu = mu.variance();
  s.globally_centered = std::abs(s.global_mean) <= kFloatTol;
  s.degenerate = s.global_second <= kFloatTol;
  return s;
}

ExactMomentSummary exact_moments(const OffspringDistribution& mu, const DisplacementFamily& nu) {
  if (!nu.is_exact()) throw ModelError("displacement laws were given in floating point");
  auto s = moments_impl<Rational>(
      mu, nu, mu.exact_probs(),
      [](const DisplacementAtom& a, std::size_t j) { return a.shift[j]; },
      [](const DisplacementAtom& a) { return a.prob; });
  s.sigma2_mu = mu.exact_variance();
  s.globally_centered = s.global_mean == 0;
  s.degenerate = s.global_second == 0;
  return s;
}

Rational multinomial_pmf(std::uint64_t h, const OffspringDistribution& mu, const LineageVector& a) {
  if (a.total() != h) return Rational(0);
  const auto& p = mu.exact_probs();
  Rational out = factorial(static_cast<unsigned>(h));
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    if (a[i] == 0) continue;
    const auto k = TypeIndex::pair(i).first;
    if (k >= p.size() || p[k] == 0) return Rational(0);
    Rational pk;
    mpz_pow_ui(pk.get_num_mpz_t(), p[k].get_num_mpz_t(), a[i]);
    mpz_pow_ui(pk.get_den_mpz_t(), p[k].get_den_mpz_t(), a[i]);
    out *= pk;
    out /= factorial(static_cast<unsigned>(a[i]));
  }
  out.canonicalize();
  return out;
}

double multinomial_pmf_float(std::uint64_t h, const OffspringDistribution& mu,
                             const LineageVector& a) {
  if (a.total() != h) return 0.0;
  double log_p = std::lgamma(static_cast<double>(h) + 1.0);
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    if (a[i] == 0) continue;
    const double pk = mu[TypeIndex::pair(i).first];
    if (pk <= 0.0) return 0.0;
    const double c = static_cast<double>(a[i]);
    log_p += c * std::log(pk) - std::lgamma(c + 1.0);
  }
  return std::exp(log_p);
}

ExactWalkLaw walk_pmf(const OffspringDistribution& mu, std::uint64_t steps) {
  return walk_law(mu.exact_probs(), steps);
}

WalkLaw walk_pmf_float(const OffspringDistribution& mu, std::uint64_t steps) {
  return walk_law(std::vector<double>(mu.probs().begin(), mu.probs().end()), steps);
}

WalkTable::WalkTable(const OffspringDistribution& mu, std::uint64_t max_steps) {
  const auto& step = mu.exact_probs();
  laws_.resize(max_steps + 1);
  laws_[0].pmf = {Rational(1)};
  for (std::uint64_t s = 1; s <= max_steps; ++s) {
    laws_[s].steps = s;
    laws_[s].min_value = -static_cast<std::int64_t>(s);
    convolve_step(laws_[s - 1].pmf, step, laws_[s].pmf);
  }
}

Rational WalkTable::forest_size_pmf(std::uint64_t k, std::uint64_t nodes) const {
  if (k == 0) return nodes == 0 ? Rational(1) : Rational(0);
  if (nodes < k) return Rational(0);
  Rational out = law(nodes).at(-static_cast<std::int64_t>(k));
  Rational ratio(static_cast<long>(k), static_cast<long>(nodes));
  ratio.canonicalize();
  return out * ratio;
}

Rational forest_size_pmf(const OffspringDistribution& mu, std::uint64_t k, std::uint64_t nodes) {
  if (k == 0) return nodes == 0 ? Rational(1) : Rational(0);
  if (nodes < k) return Rational(0);
  Rational out = walk_pmf(mu, nodes).at(-static_cast<std::int64_t>(k));
  Rational ratio(static_cast<long>(k), static_cast<long>(nodes));
  ratio.canonicalize();
  return out * ratio;
}

Rational tree_size_pmf(const OffspringDistribution& mu, std::uint64_t nodes) {
  return forest_size_pmf(mu, 1, nodes);
}

double clt_gap(const OffspringDistribution& mu, std::uint64_t steps) {
  const WalkLaw law = walk_pmf_float(mu, steps);
  const double n = static_cast<double>(steps);
  const double d = mu.span();
  const double sigma = std::sqrt(mu.variance());
  const double scale = std::sqrt(n) / d;
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
  double gap = 0.0;
  for (std::size_t i = 0; i < law.pmf.size(); i += mu.span()) {
    const double l = static_cast<double>(law.min_value + static_cast<std::int64_t>(i));
    const double g = norm * std::exp(-l * l / (2.0 * sigma * sigma * n));
    gap = std::max(gap, std::abs(scale * law.pmf[i] - g));
  }
  return gap;
}

bool jh_membership(const LineageVector& a, std::uint64_t h, const OffspringDistribution& mu) {
  if (a.total() != h) {
    throw UsageError("lineage vector sums to " + std::to_string(a.total()) + ", not h = " +
                     std::to_string(h));
  }
  const SideCounts s = side_counts(a);
  if (mu.is_exact()) {
    // |N - sigma^2 h / 2| <= h^(2/3)  <=>  |N - sigma^2 h / 2|^3 <= h^2.
    const Rational centre = mu.exact_variance() * Rational(static_cast<long>(h)) / 2;
    const Rational h2 = Rational(static_cast<long>(h)) * Rational(static_cast<long>(h));
    auto inside = [&](std::uint64_t v) {
      Rational x = Rational(static_cast<long>(v)) - centre;
      x = abs(x);
      return x * x * x <= h2;
    };
    return inside(s.left) && inside(s.right);
  }
  const double centre = mu.variance() * static_cast<double>(h) / 2.0;
  const double radius = std::cbrt(static_cast<double>(h) * static_cast<double>(h));
  auto inside = [&](std::uint64_t v) {
    return std::abs(static_cast<double>(v) - centre) <= radius * (1.0 + kFloatTol);
  };
  return inside(s.left) && inside(s.right);
}

}  // namespace gwsnake
