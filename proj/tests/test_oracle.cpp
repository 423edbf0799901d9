#include <doctest.h>

#include <map>

#include "gwsnake/error.hpp"
#include "gwsnake/oracle.hpp"

using namespace gwsnake;

namespace {

Rational q(long p, long r = 1) {
  Rational x(p, r);
  x.canonicalize();
  return x;
}

LineageVector climb(const PlanarTree& t, Node v, std::uint32_t K) {
  LineageVector a(K);
  for (Node w = v; w != 0; w = t.parent(w)) a.at(t.child_count(t.parent(w)), t.child_index(w)) += 1;
  return a;
}

// Conditional law of the lineage of u(m), tallied tree by tree.
std::map<LineageVector, Rational> tally(const EnumeratedEnsemble& ens, std::size_t m) {
  std::map<LineageVector, Rational> law;
  for (std::size_t i = 0; i < ens.trees.size(); ++i) {
    law[climb(ens.trees[i], static_cast<Node>(m), ens.max_degree)] += ens.conditional(i);
  }
  return law;
}

}  // namespace

TEST_CASE("enumeration") {
  const auto bin = OffspringDistribution::binary();
  const auto four = enumerate(bin, 4);
  REQUIRE(four.trees.size() == 2);
  CHECK(four.conditional(0) == q(1, 2));
  CHECK(four.conditional(1) == q(1, 2));
  const auto zero = enumerate(bin, 0);
  REQUIRE(zero.trees.size() == 1);
  CHECK(zero.weights[0] == q(1, 2));
  CHECK(enumerate(bin, 3).trees.empty());

  const auto three = OffspringDistribution::three_point();
  const auto e3 = enumerate(three, 3);
  CHECK(e3.trees.size() == 4);  // Motzkin number M_3
  CHECK(e3.total == tree_size_pmf(three, 4));
  CHECK_THROWS_AS(enumerate(three, 10, 100), BudgetError);
  CHECK(enumerated_forest_probability(three, 2, 5) == forest_size_pmf(three, 2, 5));
}

TEST_CASE("lineage law pins") {
  const auto bin = OffspringDistribution::binary();
  LineageVector a(2);
  a.at(2, 1) = 2;
  CHECK(lineage_law_formula(bin, 4, 2, a) == q(1, 2));
  CHECK(lineage_law_formula(bin, 4, 0, LineageVector(2)) == 1);

  // N1 = 0 leaves no room for the m - h nodes visited earlier.
  LineageVector right(2);
  right.at(2, 2) = 1;
  CHECK(lineage_law_formula(bin, 4, 3, right) == 0);

  const auto law = depth_law(bin, 4, 2);
  CHECK(law.at(1) == q(1, 2));
  CHECK(law.at(2) == q(1, 2));
  const auto root = depth_law(bin, 4, 0);
  CHECK(root.at(0) == 1);
}

TEST_CASE("formula equals tallied enumeration law") {
  for (const auto& mu : {OffspringDistribution::binary(), OffspringDistribution::three_point()}) {
    for (std::size_t n = 0; n <= 6; ++n) {
      const auto ens = enumerate(mu, n);
      if (ens.trees.empty()) continue;
      const LineageLaw law(mu, n);
      for (std::size_t m = 0; m <= n; ++m) {
        const auto expected = tally(ens, m);
        Rational total = 0;
        for (std::uint64_t h = 0; h <= m; ++h) {
          for (const auto& a : lineage_vectors_of_total(2, h)) {
            const Rational p = law.formula(n, m, a);
            auto it = expected.find(a);
            CHECK(p == (it == expected.end() ? Rational(0) : it->second));
            total += p;
          }
        }
        CHECK(total == 1);
      }
    }
  }
}

TEST_CASE("total variation to the comparison law") {
  const auto bin = OffspringDistribution::binary();
  // One tree, so u(1) is always a first child; the comparison law splits evenly.
  CHECK(tv_distance(bin, 2, 1) == q(1, 2));
  const Rational a = tv_distance(bin, 8, 4);
  const Rational b = tv_distance(bin, 20, 10);
  CHECK(a > b);
  CHECK(a <= 1);
  CHECK(b >= 0);
  Rational mass = 0;
  for (const auto& [key, p] : comparison_law(bin, 8, 4)) mass += p;
  CHECK(mass == 1);
}

TEST_CASE("identity suite") {
  VerifyOptions opts;
  opts.max_edges = 6;
  const auto report = verify_identities(OffspringDistribution::binary(), opts);
  CHECK(report.all_passed());
  for (const auto& c : report.checks) CHECK(c.counterexample.empty());
  CHECK(report.find("first_visit_plus_height").instances > 0);

  VerifyOptions tiny;
  tiny.max_edges = 0;
  tiny.otter_max_nodes = 1;
  CHECK(verify_identities(OffspringDistribution::three_point(), tiny).all_passed());
}

TEST_CASE("a corrupted lineage is caught") {
  VerifyOptions opts;
  opts.max_edges = 5;
  opts.lineage_law = false;
  opts.lineage_fn = [](const PlanarTree& t, Node v, std::uint32_t K) {
    LineageVector a = lineage(t, v, K);
    if (t.depth(v) >= 2) a[TypeIndex::flat(K, 1)] += 1;
    return a;
  };
  const auto report = verify_identities(OffspringDistribution::three_point(), opts);
  CHECK_FALSE(report.all_passed());
  const auto& c = report.find("branch_content");
  CHECK_FALSE(c.passed);
  CHECK_FALSE(c.counterexample.empty());
  CHECK(report.find("first_visit_plus_height").passed);
}
