#include <doctest.h>

#include <functional>

#include "gwsnake/error.hpp"
#include "gwsnake/lineage.hpp"
#include "gwsnake/oracle.hpp"
#include "gwsnake/spanned.hpp"
#include "gwsnake/tree.hpp"

using namespace gwsnake;

namespace {

PlanarTree make(std::vector<std::uint32_t> seq) { return PlanarTree::from_child_counts(seq); }

// Root with five children; the third has four, whose second has two, whose
// second has one child u.
PlanarTree lineage_example() { return make({5, 0, 0, 4, 0, 2, 0, 1, 0, 0, 0, 0, 0}); }

// Contour by explicit recursion over children.
std::vector<Node> contour_by_recursion(const PlanarTree& t) {
  std::vector<Node> walk;
  std::function<void(Node)> visit = [&](Node v) {
    walk.push_back(v);
    for (Node c : t.children(v)) {
      visit(c);
      walk.push_back(v);
    }
  };
  visit(0);
  return walk;
}

// Typed ancestors counted by climbing parent links.
LineageVector lineage_by_climbing(const PlanarTree& t, Node v, std::uint32_t K) {
  LineageVector a(K);
  for (Node w = v; w != 0; w = t.parent(w)) {
    const Node p = t.parent(w);
    a.at(t.child_count(p), t.child_index(w)) += 1;
  }
  return a;
}

}  // namespace

TEST_CASE("child counts build the expected trees") {
  const PlanarTree cherry = make({2, 0, 0});
  CHECK(cherry.edges() == 2);
  CHECK(cherry.word(1) == "1");
  CHECK(cherry.word(2) == "2");
  CHECK(cherry.parent(1) == 0);
  CHECK(cherry.parent(2) == 0);

  const PlanarTree single = make({0});
  CHECK(single.edges() == 0);
  CHECK(single.size() == 1);

  const PlanarTree t = make({2, 2, 0, 0, 0});
  std::vector<std::string> words;
  for (Node v = 0; v < t.size(); ++v) words.push_back(t.word(v));
  CHECK(words == std::vector<std::string>{"", "1", "1.1", "1.2", "2"});
  std::vector<std::uint32_t> depths(t.depths().begin(), t.depths().end());
  CHECK(depths == std::vector<std::uint32_t>{0, 1, 2, 2, 1});
  CHECK(std::vector<std::uint32_t>(t.child_counts().begin(), t.child_counts().end()) ==
        std::vector<std::uint32_t>{2, 2, 0, 0, 0});
  CHECK(t.subtree_size(1) == 3);
  CHECK(t.common_ancestor(2, 3) == 1);
  CHECK(t.common_ancestor(3, 4) == 0);
  CHECK(t.ancestor_at_depth(3, 1) == 1);
  CHECK(t.direction(0, 3) == 1);
  CHECK(t.direction(1, 3) == 2);
  CHECK(t.height() == 2);
  CHECK(t.max_degree() == 2);
}

TEST_CASE("invalid sequences report the offending index") {
  try {
    make({0, 0, 2});
    FAIL("accepted");
  } catch (const InvalidSequenceError& e) {
    CHECK(e.index() == 0);
    CHECK(e.exit_code() == 2);
  }
  CHECK_THROWS_AS(make({2, 0}), InvalidSequenceError);
  CHECK_THROWS_AS(make({}), InvalidSequenceError);
  CHECK_THROWS_AS(make({1, 0, 0}), InvalidSequenceError);
}

TEST_CASE("depth-first walk and encodings") {
  const PlanarTree cherry = make({2, 0, 0});
  CHECK(depth_first_walk(cherry) == std::vector<Node>{0, 1, 0, 2, 0});
  const Encodings e = encodings(cherry);
  CHECK(e.height == std::vector<std::uint32_t>{0, 1, 1});
  CHECK(e.contour == std::vector<std::uint32_t>{0, 1, 0, 1, 0});
  CHECK(e.first_visit == std::vector<std::uint32_t>{0, 1, 3});

  const PlanarTree single = make({0});
  CHECK(depth_first_walk(single) == std::vector<Node>{0});
  CHECK(encodings(single).first_visit == std::vector<std::uint32_t>{0});

  const PlanarTree nine = make({3, 2, 0, 1, 0, 0, 2, 1, 0, 0});
  CHECK(nine.edges() == 9);
  const auto walk = depth_first_walk(nine);
  CHECK(walk.size() == 19);
  CHECK(walk.front() == 0);
  CHECK(walk.back() == 0);
}

TEST_CASE("walks and first visits agree with a recursive contour on all small trees") {
  const auto mu = OffspringDistribution::exact({Rational(1, 4), Rational(1, 4), Rational(1, 4),
                                                Rational(1, 4)},
                                               Criticality::kUnchecked);
  for (std::size_t n = 0; n <= 6; ++n) {
    for (const auto& t : enumerate(mu, n).trees) {
      const auto walk = depth_first_walk(t);
      REQUIRE(walk == contour_by_recursion(t));
      const Encodings e = encodings(t);
      std::vector<int> visits(t.size(), 0);
      for (Node v : walk) ++visits[v];
      for (Node v = 0; v < t.size(); ++v) {
        CHECK(visits[v] == static_cast<int>(t.child_count(v)) + 1);
        CHECK(e.first_visit[v] + e.height[v] == 2 * v);
        CHECK(walk[e.first_visit[v]] == v);
      }
      for (std::size_t i = 0; i < walk.size(); ++i) CHECK(e.contour[i] == t.depth(walk[i]));
    }
  }
}

TEST_CASE("lineage of the reference example") {
  const PlanarTree t = lineage_example();
  const Node u = 8;
  const LineageVector a = lineage(t, u, 5);
  CHECK(a(1, 1) == 1);
  CHECK(a(2, 2) == 1);
  CHECK(a(4, 2) == 1);
  CHECK(a(5, 3) == 1);
  CHECK(a.total() == 4);
  CHECK(a.total() == t.depth(u));
  const SideCounts nn = side_counts(a);
  CHECK(nn.left == 4);
  CHECK(nn.right == 4);

  CHECK(lineage(t, 0, 5).total() == 0);
  const LineageVector w = lineage(t, u, 5, 2);
  CHECK(w.total() == 2);
  CHECK(w(1, 1) == 1);
  CHECK(w(2, 2) == 1);
}

TEST_CASE("lineage small cases and side counts") {
  const PlanarTree cherry = make({2, 0, 0});
  const LineageVector a = lineage(cherry, 2, 2);
  CHECK(a(2, 2) == 1);
  CHECK(a(2, 1) == 0);
  CHECK(a.to_string() == "{(2,2):1}");

  CHECK(side_counts(LineageVector(3)) == SideCounts{0, 0});
  LineageVector b(2);
  b.at(2, 1) = 2;
  b.at(2, 2) = 1;
  CHECK(side_counts(b) == SideCounts{1, 2});
}

TEST_CASE("lineage matches parent climbing on every small tree") {
  const auto mu = OffspringDistribution::three_point();
  for (std::size_t n = 0; n <= 6; ++n) {
    for (const auto& t : enumerate(mu, n).trees) {
      for (Node v = 0; v < t.size(); ++v) {
        const auto a = lineage(t, v, 2);
        REQUIRE(a == lineage_by_climbing(t, v, 2));
        CHECK(a.total() == t.depth(v));
      }
    }
  }
}

TEST_CASE("type index round trip") {
  std::size_t expected = 0;
  for (std::uint32_t k = 1; k <= 5; ++k) {
    for (std::uint32_t j = 1; j <= k; ++j) {
      CHECK(TypeIndex::flat(k, j) == expected);
      CHECK(TypeIndex::pair(expected) == std::pair{k, j});
      ++expected;
    }
  }
  CHECK(TypeIndex::size(5) == expected);
}

TEST_CASE("spanned decomposition of a cherry with both leaves marked") {
  const PlanarTree cherry = make({2, 0, 0});
  const std::vector<Node> marked{1, 2};
  const auto d = spanned_decomposition(cherry, marked, 2);
  CHECK(d.branching == std::vector<Node>{0});
  CHECK(d.distinguished == std::vector<Node>{0, 1, 2});
  CHECK(d.shape.size() == 3);
  CHECK(d.shape.child_count(0) == 2);
  for (const auto& b : d.branches) {
    CHECK(b.length == 0);
    CHECK(b.content.total() == 0);
  }
  CHECK(d.theta.size() == 1);
  CHECK(d.theta[0].arity == 2);
  CHECK(d.theta[0].directions == std::vector<std::uint32_t>{1, 2});
  const auto from_shape = sub_counts_from_shape(d);
  for (std::size_t l = 0; l < d.sub_counts.size(); ++l) {
    CHECK(from_shape[l] == static_cast<std::int64_t>(d.sub_counts[l]));
  }
}

TEST_CASE("single marked node gives one branch holding its lineage") {
  const PlanarTree t = lineage_example();
  const Node last = static_cast<Node>(t.edges());
  const std::vector<Node> marked{last};
  const auto d = spanned_decomposition(t, marked, 5);
  CHECK(d.shape.size() == 2);
  REQUIRE(d.branches.size() == 1);
  const LineageVector full = lineage(t, last, 5);
  // The root's own contribution sits in the branching data, not the branch.
  LineageVector without_root = full;
  without_root.at(t.child_count(0), t.direction(0, last)) -= 1;
  CHECK(d.branches[0].content == without_root);
  CHECK(d.branches[0].length == t.depth(last) - 1);
}

TEST_CASE("spanned decomposition rejects bad marked lists") {
  const PlanarTree t = make({2, 0, 0});
  const std::vector<Node> with_root{0, 1};
  const std::vector<Node> unsorted{2, 1};
  const std::vector<Node> empty;
  CHECK_THROWS_AS(spanned_decomposition(t, with_root, 2), UsageError);
  CHECK_THROWS_AS(spanned_decomposition(t, unsorted, 2), UsageError);
  CHECK_THROWS_AS(spanned_decomposition(t, empty, 2), UsageError);
}

TEST_CASE("shape, branch and gap formulas on enumerated three-point trees") {
  const auto mu = OffspringDistribution::three_point();
  for (std::size_t n = 1; n <= 6; ++n) {
    for (const auto& t : enumerate(mu, n).trees) {
      for (Node a = 1; a <= n; ++a) {
        for (Node b = a + 1; b <= n; ++b) {
          const std::vector<Node> marked{a, b};
          const auto d = spanned_decomposition(t, marked, 2);
          const auto subs = sub_counts_from_shape(d);
          const auto fringe = fringe_sizes_from_heights(d, n);
          REQUIRE(subs.size() == d.sub_counts.size());
          for (std::size_t l = 0; l < subs.size(); ++l) {
            CHECK(subs[l] == static_cast<std::int64_t>(d.sub_counts[l]));
            CHECK(fringe[l] == static_cast<std::int64_t>(d.fringe_sizes[l]));
          }
          // Shape ancestry mirrors tree ancestry on the marked nodes.
          CHECK(d.shape.is_ancestor_or_self(d.shape_of_marked[0], d.shape_of_marked[1]) ==
                t.is_ancestor_or_self(a, b));
        }
      }
    }
  }
}
