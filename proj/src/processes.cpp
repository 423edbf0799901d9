#include "gwsnake/processes.hpp"

#include <algorithm>
#include <cmath>

#include "gwsnake/error.hpp"
#include "gwsnake/lineage.hpp"

namespace gwsnake {

namespace {

// Position of s on the grid: segment index and fractional part. Points within
// rounding distance of a breakpoint snap onto it.
std::pair<std::size_t, double> locate(double s, std::size_t steps) {
  if (!(s > 0.0)) return {0, 0.0};
  if (s >= 1.0) return {steps, 0.0};
  const double x = s * static_cast<double>(steps);
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return {static_cast<std::size_t>(r), 0.0};
  const double f = std::floor(x);
  return {static_cast<std::size_t>(f), x - f};
}

double pow_quarter(std::size_t n) { return std::pow(static_cast<double>(n), 0.25); }

void require_edges(const PlanarTree& t, std::size_t min_edges) {
  if (t.edges() < min_edges) {
    throw UsageError("path functionals need a tree with at least " + std::to_string(min_edges) +
                     " edge(s)");
  }
}

}  // namespace

double PathFunction::evaluate(double s) const {
  const auto [i, frac] = locate(s, steps());
  if (frac == 0.0 || i >= steps()) return values_[std::min(i, steps())];
  return values_[i] + frac * (values_[i + 1] - values_[i]);
}

double path_min(const PathFunction& p, double s, double t) {
  const double a = std::min(s, t), b = std::max(s, t);
  double best = std::min(p.evaluate(a), p.evaluate(b));
  const std::size_t n = p.steps();
  const std::size_t ia = locate(a, n).first;
  const std::size_t ib = locate(b, n).first;
  // Breakpoints strictly after a and not past b.
  for (std::size_t i = ia + 1; i <= ib && i <= n; ++i) best = std::min(best, p[i]);
  return best;
}

VectorPath::VectorPath(std::uint32_t max_degree, std::size_t steps, double scale)
    : max_degree_(max_degree),
      dim_(TypeIndex::size(max_degree)),
      steps_(steps),
      scale_(scale),
      raw_((steps + 1) * dim_, 0.0) {}

double VectorPath::evaluate(double s, std::size_t idx) const {
  const auto [i, frac] = locate(s, steps_);
  if (frac == 0.0 || i >= steps_) return value(std::min(i, steps_), idx);
  return value(i, idx) + frac * (value(i + 1, idx) - value(i, idx));
}

PathFunction VectorPath::component(std::size_t idx) const {
  std::vector<double> v(steps_ + 1);
  for (std::size_t i = 0; i <= steps_; ++i) v[i] = value(i, idx);
  return PathFunction(std::move(v));
}

HeightPaths height_paths(const PlanarTree& t) {
  require_edges(t, 1);
  const Encodings e = encodings(t);
  const double inv = 1.0 / std::sqrt(static_cast<double>(t.edges()));
  std::vector<double> h(e.height.size()), c(e.contour.size());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = e.height[i] * inv;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = e.contour[i] * inv;
  return {PathFunction(std::move(h)), PathFunction(std::move(c))};
}

SnakePaths normalized_processes(const LabeledTree& lt) {
  const PlanarTree& t = lt.tree;
  auto hp = height_paths(t);
  const double inv = 1.0 / pow_quarter(t.edges());
  std::vector<double> r(t.size());
  for (Node v = 0; v < t.size(); ++v) r[v] = lt.labels[v] * inv;
  const std::vector<Node> walk = depth_first_walk(t);
  std::vector<double> rc(walk.size());
  for (std::size_t i = 0; i < walk.size(); ++i) rc[i] = lt.labels[walk[i]] * inv;
  return {std::move(hp.h), std::move(hp.contour), PathFunction(std::move(r)),
          PathFunction(std::move(rc))};
}

VectorPath lineage_field(const PlanarTree& t, const OffspringDistribution& mu) {
  const std::uint32_t K = mu.max_degree();
  if (t.max_degree() > K) {
    throw UsageError("tree has a node with " + std::to_string(t.max_degree()) +
                     " children, more than K = " + std::to_string(K));
  }
  const std::size_t n = t.edges();
  VectorPath g(K, n, n == 0 ? 1.0 : 1.0 / pow_quarter(n));
  const std::size_t dim = g.dimension();
  std::vector<double> mu_of(dim);
  for (std::size_t idx = 0; idx < dim; ++idx) mu_of[idx] = mu[TypeIndex::pair(idx).first];

  std::vector<std::int64_t> counts(dim, 0);
  std::vector<std::size_t> path;  // type of the edge into each node of the current branch
  path.reserve(t.height() + 1);
  for (Node v = 1; v < t.size(); ++v) {
    const std::uint32_t d = t.depth(v);
    while (path.size() >= d) {
      --counts[path.back()];
      path.pop_back();
    }
    const std::size_t idx = TypeIndex::flat(t.child_count(t.parent(v)), t.child_index(v));
    ++counts[idx];
    path.push_back(idx);
    for (std::size_t i = 0; i < dim; ++i) {
      g.raw(v, i) = static_cast<double>(counts[i]) - mu_of[i] * d;
    }
  }
  return g;
}

LabelDecomposition label_decomposition(const LabeledTree& lt, const OffspringDistribution& mu,
                                       const MomentSummary& ms) {
  const PlanarTree& t = lt.tree;
  require_edges(t, 1);
  const std::size_t n = t.edges();
  const double scale = 1.0 / pow_quarter(n);

  std::vector<double> centered(t.size(), 0.0);
  for (Node v = 1; v < t.size(); ++v) {
    const Node p = t.parent(v);
    const double m = ms.mean_kj[TypeIndex::flat(t.child_count(p), t.child_index(v))];
    centered[v] = centered[p] + (lt.labels[v] - lt.labels[p] - m);
  }

  const VectorPath g = lineage_field(t, mu);
  std::vector<double> r(t.size()), r1(t.size()), r2(t.size()), drift(t.size());
  double residual = 0.0;
  for (Node v = 0; v < t.size(); ++v) {
    double dot = 0.0;
    for (std::size_t i = 0; i < g.dimension(); ++i) dot += g.raw(v, i) * ms.mean_kj[i];
    r[v] = lt.labels[v] * scale;
    r1[v] = centered[v] * scale;
    r2[v] = dot * scale;
    drift[v] = static_cast<double>(t.depth(v)) * ms.global_mean * scale;
    const double gap = std::abs(r[v] - r1[v] - r2[v] - drift[v]) / std::max(1.0, std::abs(r[v]));
    residual = std::max(residual, gap);
  }
  return {PathFunction(std::move(r)), PathFunction(std::move(r1)), PathFunction(std::move(r2)),
          PathFunction(std::move(drift)), residual};
}

Diagnostics diagnostics(const PlanarTree& t, const OffspringDistribution& mu, bool full_windows) {
  require_edges(t, 2);
  const std::uint32_t K = mu.max_degree();
  if (t.max_degree() > K) {
    throw UsageError("tree degree exceeds K = " + std::to_string(K));
  }
  const std::size_t n = t.edges();
  const double log_n = std::log(static_cast<double>(n));
  Diagnostics out;

  for (Node v = 0; v + 1 < t.size(); ++v) {
    const double inc = std::abs(static_cast<double>(t.depth(v + 1)) - t.depth(v));
    out.max_increment = std::max(out.max_increment, inc);
  }
  out.max_increment_ratio = out.max_increment / log_n;
  out.last_depth_ratio = t.depth(static_cast<Node>(n)) / log_n;

  // prefix[d * dim + idx]: typed edges among depths 1..d on the current branch.
  const std::size_t dim = TypeIndex::size(K);
  std::vector<std::uint32_t> prefix((t.height() + 1) * dim, 0);
  std::vector<double> mu_of(dim);
  for (std::size_t idx = 0; idx < dim; ++idx) mu_of[idx] = mu[TypeIndex::pair(idx).first];
  for (Node v = 1; v < t.size(); ++v) {
    const std::uint32_t d = t.depth(v);
    std::copy_n(prefix.begin() + (d - 1) * dim, dim, prefix.begin() + d * dim);
    ++prefix[d * dim + TypeIndex::flat(t.child_count(t.parent(v)), t.child_index(v))];
    for (std::uint32_t l = 1; l <= d; l = full_windows ? l + 1 : l * 2) {
      const double norm = std::sqrt(l * log_n);
      for (std::size_t idx = 0; idx < dim; ++idx) {
        const double a = static_cast<double>(prefix[d * dim + idx]) -
                         static_cast<double>(prefix[(d - l) * dim + idx]);
        out.concentration = std::max(out.concentration, std::abs(a - mu_of[idx] * l) / norm);
      }
    }
  }

  // Both paths are linear between points j / (2n), so the grid sup is exact.
  const Encodings e = encodings(t);
  const double inv = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t j = 0; j <= 2 * n; ++j) {
    const double h = j % 2 == 0 ? e.height[j / 2] : 0.5 * (e.height[j / 2] + e.height[j / 2 + 1]);
    out.sup_gap = std::max(out.sup_gap, std::abs(e.contour[j] - h) * inv);
  }
  return out;
}

}  // namespace gwsnake
