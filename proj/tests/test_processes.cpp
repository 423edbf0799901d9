#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gwsnake/error.hpp"
#include "gwsnake/processes.hpp"
#include "gwsnake/sampler.hpp"

using namespace gwsnake;

namespace {

Rational q(long p, long r = 1) {
  Rational x(p, r);
  x.canonicalize();
  return x;
}

PlanarTree make(std::vector<std::uint32_t> seq) { return PlanarTree::from_child_counts(seq); }

DisplacementFamily deterministic() {
  DisplacementFamily nu;
  nu.set_exact(2, {{{q(1), q(-1)}, q(1)}});
  return nu;
}

DisplacementFamily mixed() {
  DisplacementFamily nu;
  nu.set_exact(2, {{{q(2), q(-1)}, q(1, 2)}, {{q(0), q(-1)}, q(1, 2)}});
  return nu;
}

}  // namespace

TEST_CASE("normalized paths of a cherry") {
  const auto cherry = make({2, 0, 0});
  const auto lt = assign_labels(cherry, deterministic(), SeedSpec{1, 0});
  const auto p = normalized_processes(lt);
  const double q4 = std::pow(2.0, 0.25);
  CHECK(p.r.evaluate(0.0) == 0.0);
  CHECK(p.r.evaluate(0.5) == doctest::Approx(1.0 / q4));
  CHECK(p.r.evaluate(1.0) == doctest::Approx(-1.0 / q4));
  CHECK(p.r.evaluate(0.75) == doctest::Approx(0.0));
  CHECK(p.h.evaluate(0.0) == 0.0);
  CHECK(p.contour.evaluate(0.0) == 0.0);
  CHECK(p.h.evaluate(0.5) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(p.contour.steps() == 4);
  CHECK(p.r_contour.steps() == 4);
  CHECK(p.r_contour.evaluate(0.75) == doctest::Approx(-1.0 / q4));
  CHECK_THROWS_AS(height_paths(make({0})), UsageError);
}

TEST_CASE("path minimum") {
  const PathFunction p(std::vector<double>{0.0, 2.0, 1.0, 3.0, 0.5});
  CHECK(path_min(p, 0.3, 0.3) == doctest::Approx(p.evaluate(0.3)));
  CHECK(path_min(p, 0.3, 0.7) == doctest::Approx(1.0));
  CHECK(path_min(p, 0.7, 0.3) == doctest::Approx(1.0));
  CHECK(path_min(p, 0.0, 0.2) == 0.0);
  CHECK(path_min(p, 0.8, 0.9) == doctest::Approx(p.evaluate(0.9)));

  const auto h = height_paths(make({2, 0, 0})).h;
  auto dense = [](const PathFunction& f, double s, double t) {
    double m = f.evaluate(s);
    for (double x = s; x <= t; x += 1e-4) m = std::min(m, f.evaluate(x));
    return std::min(m, f.evaluate(t));
  };
  CHECK(std::abs(path_min(h, 0.25, 0.75) - dense(h, 0.25, 0.75)) < 1e-12);

  const auto t = sample_conditioned_tree(OffspringDistribution::binary(), 200, SeedSpec{4, 0});
  const auto hp = height_paths(t).h;
  for (double s : {0.05, 0.2, 0.5}) {
    for (double u : {0.21, 0.6, 0.95}) {
      if (u < s) continue;
      // Grid points include every breakpoint, so the grid minimum is exact.
      double m = std::min(hp.evaluate(s), hp.evaluate(u));
      for (std::size_t i = 0; i <= hp.steps(); ++i) {
        const double x = static_cast<double>(i) / hp.steps();
        if (x >= s && x <= u) m = std::min(m, hp[i]);
      }
      CHECK(path_min(hp, s, u) == doctest::Approx(m).epsilon(1e-12));
    }
  }
}

TEST_CASE("lineage field agrees with per-node lineages") {
  const auto cherry = make({2, 0, 0});
  const auto g = lineage_field(cherry, OffspringDistribution::binary());
  const double q4 = std::pow(2.0, 0.25);
  CHECK(g.dimension() == 3);
  for (std::size_t idx = 0; idx < 3; ++idx) CHECK(g.evaluate(0.0, idx) == 0.0);
  CHECK(g.evaluate(0.5, TypeIndex::flat(2, 1)) == doctest::Approx(0.5 / q4));
  CHECK(g.evaluate(0.5, TypeIndex::flat(2, 2)) == doctest::Approx(-0.5 / q4));
  CHECK(g.evaluate(0.5, TypeIndex::flat(1, 1)) == 0.0);

  const auto mu = OffspringDistribution::three_point();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto t = sample_conditioned_tree(mu, 300, SeedSpec{s, 3});
    const auto f = lineage_field(t, mu);
    for (Node v = 0; v < t.size(); ++v) {
      const auto a = lineage(t, v, 2);
      for (std::uint32_t k = 1; k <= 2; ++k) {
        for (std::uint32_t j = 1; j <= k; ++j) {
          const double expected = static_cast<double>(a(k, j)) - mu[k] * t.depth(v);
          CHECK(f.raw(v, TypeIndex::flat(k, j)) == expected);
        }
      }
    }
  }
}

TEST_CASE("deterministic labels are a difference of lineage components") {
  const auto mu = OffspringDistribution::binary();
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto t = sample_conditioned_tree(mu, 500, SeedSpec{s, 0});
    const auto lt = assign_labels(t, deterministic(), SeedSpec{s, 1});
    const auto g = lineage_field(t, mu);
    for (Node v = 0; v < t.size(); ++v) {
      CHECK(lt.labels[v] == g.raw(v, TypeIndex::flat(2, 1)) - g.raw(v, TypeIndex::flat(2, 2)));
    }
  }
}

TEST_CASE("label decomposition") {
  const auto mu = OffspringDistribution::binary();
  const auto t = sample_conditioned_tree(mu, 400, SeedSpec{8, 0});

  const auto det = label_decomposition(assign_labels(t, deterministic(), SeedSpec{8, 1}), mu,
                                       moments(mu, deterministic()));
  for (double x : det.r1.values()) CHECK(x == 0.0);
  CHECK(det.residual < 1e-12);

  DisplacementFamily flip;
  flip.set_exact(2, {{{q(1), q(-1)}, q(1, 2)}, {{q(-1), q(1)}, q(1, 2)}});
  const auto fl = label_decomposition(assign_labels(t, flip, SeedSpec{8, 2}), mu, moments(mu, flip));
  for (double x : fl.r2.values()) CHECK(x == 0.0);
  for (std::size_t i = 0; i <= fl.r.steps(); ++i) CHECK(fl.r[i] == doctest::Approx(fl.r1[i]));

  double worst = 0.0;
  const auto ms = moments(mu, mixed());
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto tree = sample_conditioned_tree(mu, 500, SeedSpec{s, 10});
    const auto d = label_decomposition(assign_labels(tree, mixed(), SeedSpec{s, 11}), mu, ms);
    worst = std::max(worst, d.residual);
    for (double x : d.drift.values()) REQUIRE(x == 0.0);
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("diagnostics") {
  const auto d = diagnostics(make({2, 0, 0}), OffspringDistribution::binary());
  CHECK(d.max_increment == 1.0);
  CHECK(d.max_increment_ratio == doctest::Approx(1.0 / std::log(2.0)));
  CHECK(d.sup_gap >= 0.0);
  CHECK_THROWS_AS(diagnostics(make({1, 0}), OffspringDistribution::three_point()), UsageError);

  const auto t = sample_conditioned_tree(OffspringDistribution::binary(), 2000, SeedSpec{1, 0});
  const auto quick = diagnostics(t, OffspringDistribution::binary());
  const auto full = diagnostics(t, OffspringDistribution::binary(), true);
  CHECK(full.concentration >= quick.concentration);
  CHECK(quick.last_depth_ratio == doctest::Approx(t.depth(static_cast<Node>(t.edges())) / std::log(2000.0)));
}
