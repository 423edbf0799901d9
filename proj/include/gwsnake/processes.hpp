#pragma once

#include <cstdint>
#include <vector>

#include "gwsnake/distributions.hpp"
#include "gwsnake/tree.hpp"

namespace gwsnake {

// Piecewise-linear function on [0, 1] with equally spaced breakpoints
// i / N, i = 0..N.
class PathFunction {
 public:
  PathFunction() = default;
  explicit PathFunction(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t steps() const { return values_.empty() ? 0 : values_.size() - 1; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double evaluate(double s) const;

 private:
  std::vector<double> values_;
};

// Exact minimum of p over [min(s,t), max(s,t)].
double path_min(const PathFunction& p, double s, double t);

// Components indexed by I_K sharing breakpoints i / n. Values are kept
// unnormalized (integers shifted by mu_k * depth); value() applies the scale.
class VectorPath {
 public:
  VectorPath(std::uint32_t max_degree, std::size_t steps, double scale);

  std::uint32_t max_degree() const { return max_degree_; }
  std::size_t dimension() const { return dim_; }
  std::size_t steps() const { return steps_; }
  double scale() const { return scale_; }

  double raw(std::size_t i, std::size_t idx) const { return raw_[i * dim_ + idx]; }
  double& raw(std::size_t i, std::size_t idx) { return raw_[i * dim_ + idx]; }
  double value(std::size_t i, std::size_t idx) const { return scale_ * raw(i, idx); }
  // Linear interpolation of component idx at s in [0, 1].
  double evaluate(double s, std::size_t idx) const;
  PathFunction component(std::size_t idx) const;

 private:
  std::uint32_t max_degree_;
  std::size_t dim_;
  std::size_t steps_;
  double scale_;
  std::vector<double> raw_;
};

struct HeightPaths {
  PathFunction h;        // H_i / sqrt(n) at i / n
  PathFunction contour;  // Ĥ(i) / sqrt(n) at i / (2n)
};

struct SnakePaths {
  PathFunction h;
  PathFunction contour;
  PathFunction r;          // R_i / n^(1/4) at i / n
  PathFunction r_contour;  // R̂(i) / n^(1/4) at i / (2n)
};

// Require n >= 1; throw UsageError otherwise.
HeightPaths height_paths(const PlanarTree& t);
SnakePaths normalized_processes(const LabeledTree& lt);

// g_{k,j}(i) = A_{u(i),k,j} - mu_k |u(i)|, scaled by n^(-1/4). One
// depth-first sweep.
VectorPath lineage_field(const PlanarTree& t, const OffspringDistribution& mu);

struct LabelDecomposition {
  PathFunction r;
  PathFunction r1;     // centered displacements summed along the ancestral line
  PathFunction r2;     // <G, m>
  PathFunction drift;  // n^(-1/4) |u(i)| times the global mean
  // max_i |r - r1 - r2 - drift| / max(1, |r|)
  double residual = 0.0;
};

LabelDecomposition label_decomposition(const LabeledTree& lt, const OffspringDistribution& mu,
                                       const MomentSummary& ms);

struct Diagnostics {
  double max_increment = 0.0;        // max_l | |u(l+1)| - |u(l)| |
  double max_increment_ratio = 0.0;  // divided by log n
  double last_depth_ratio = 0.0;     // |u(n)| / log n
  double concentration = 0.0;  // max |A_{u,l,k,j} - mu_k l| / sqrt(l log n)
  double sup_gap = 0.0;        // sup_t |ĥ_n(t) - h_n(t)|
};

// Windows l run over powers of two unless full_windows is set (quadratic).
Diagnostics diagnostics(const PlanarTree& t, const OffspringDistribution& mu,
                        bool full_windows = false);

}  // namespace gwsnake
