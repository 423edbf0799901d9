#include "gwsnake/oracle.hpp"

#include <algorithm>
#include <sstream>

#include "gwsnake/error.hpp"
#include "gwsnake/spanned.hpp"

namespace gwsnake {

namespace {

std::vector<std::uint32_t> support_of(const OffspringDistribution& mu) {
  std::vector<std::uint32_t> s;
  for (std::uint32_t k = 0; k <= mu.max_degree(); ++k) {
    if (mu.exact_probs()[k] != 0) s.push_back(k);
  }
  return s;
}

// Sequences of the given length whose partial sums of (c - 1) first hit
// -roots at the last entry, degrees increasing lexicographically.
template <typename F>
void for_each_sequence(const std::vector<std::uint32_t>& support, std::size_t length,
                       std::int64_t roots, F&& visit) {
  std::vector<std::uint32_t> seq(length);
  auto rec = [&](auto&& self, std::size_t i, std::int64_t sum) -> void {
    if (i == length) {
      if (sum == -roots) visit(seq);
      return;
    }
    const auto remaining = static_cast<std::int64_t>(length - i);
    for (std::uint32_t c : support) {
      const std::int64_t next = sum + static_cast<std::int64_t>(c) - 1;
      if (i + 1 < length && next <= -roots) continue;
      // Every later entry lowers the sum by at most one.
      if (next + roots > remaining - 1) break;
      seq[i] = c;
      self(self, i + 1, next);
    }
  };
  if (length > 0) rec(rec, 0, 0);
}

std::string seq_string(std::span<const std::uint32_t> seq) {
  std::string out = "(";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(seq[i]);
  }
  return out + ')';
}

std::string nodes_string(std::span<const Node> v) {
  return seq_string(std::span<const std::uint32_t>(v.data(), v.size()));
}

void compositions(std::size_t dim, std::uint64_t h, std::size_t i, LineageVector& cur,
                  std::vector<LineageVector>& out) {
  if (i + 1 == dim) {
    cur[i] = h;
    out.push_back(cur);
    cur[i] = 0;
    return;
  }
  for (std::uint64_t x = 0; x <= h; ++x) {
    cur[i] = x;
    compositions(dim, h - x, i + 1, cur, out);
  }
  cur[i] = 0;
}

void fail(IdentityCheck& check, const std::string& message) {
  if (check.passed) check.counterexample = message;
  check.passed = false;
}

}  // namespace

EnumeratedEnsemble enumerate(const OffspringDistribution& mu, std::size_t n_edges,
                             std::uint64_t cap) {
  const auto& p = mu.exact_probs();
  EnumeratedEnsemble e;
  e.n_edges = n_edges;
  e.max_degree = mu.max_degree();
  e.total = 0;
  for_each_sequence(support_of(mu), n_edges + 1, 1, [&](const std::vector<std::uint32_t>& seq) {
    if (e.trees.size() == cap) {
      throw BudgetError("enumeration cap of " + std::to_string(cap) + " trees exceeded", cap);
    }
    Rational w = 1;
    for (auto c : seq) w *= p[c];
    e.trees.push_back(PlanarTree::from_child_counts(seq));
    e.total += w;
    e.weights.push_back(std::move(w));
  });
  return e;
}

Rational enumerated_forest_probability(const OffspringDistribution& mu, std::uint32_t roots,
                                       std::size_t nodes, std::uint64_t cap) {
  if (roots == 0) return nodes == 0 ? Rational(1) : Rational(0);
  const auto& p = mu.exact_probs();
  Rational total = 0;
  std::uint64_t count = 0;
  for_each_sequence(support_of(mu), nodes, roots, [&](const std::vector<std::uint32_t>& seq) {
    if (++count > cap) {
      throw BudgetError("enumeration cap of " + std::to_string(cap) + " forests exceeded", cap);
    }
    Rational w = 1;
    for (auto c : seq) w *= p[c];
    total += w;
  });
  return total;
}

std::vector<LineageVector> lineage_vectors_of_total(std::uint32_t max_degree, std::uint64_t h) {
  std::vector<LineageVector> out;
  LineageVector cur(max_degree);
  if (cur.dimension() == 0) {
    if (h == 0) out.push_back(cur);
    return out;
  }
  compositions(cur.dimension(), h, 0, cur, out);
  return out;
}

LineageLaw::LineageLaw(const OffspringDistribution& mu, std::size_t max_edges)
    : mu_(mu), walks_(mu, max_edges + 1) {}

Rational LineageLaw::formula(std::size_t n, std::size_t m, const LineageVector& a) const {
  if (m > n) return 0;
  const std::uint64_t h = a.total();
  if (h > m) return 0;
  const SideCounts s = side_counts(a);
  const Rational z = walks_.tree_size_pmf(n + 1);
  if (z == 0) throw ModelError("no tree with " + std::to_string(n) + " edges under mu");
  Rational out = multinomial_pmf(h, mu_, a);
  if (out == 0) return out;
  out *= walks_.forest_size_pmf(s.left, m - h);
  if (out == 0) return out;
  out *= walks_.forest_size_pmf(1 + s.right, n + 1 - m);
  return out / z;
}

std::map<std::uint64_t, Rational> LineageLaw::depth_law(std::size_t n, std::size_t m) const {
  std::map<std::uint64_t, Rational> law;
  for (std::uint64_t h = 0; h <= m; ++h) {
    Rational sum = 0;
    for (const auto& a : lineage_vectors_of_total(mu_.max_degree(), h)) sum += formula(n, m, a);
    if (sum != 0) law[h] = sum;
  }
  return law;
}

Rational LineageLaw::tv_distance(std::size_t n, std::size_t m) const {
  const auto depth = depth_law(n, m);
  Rational sum = 0;
  for (const auto& [h, ph] : depth) {
    for (const auto& a : lineage_vectors_of_total(mu_.max_degree(), h)) {
      sum += abs(formula(n, m, a) - multinomial_pmf(h, mu_, a) * ph);
    }
  }
  return sum / 2;
}

Rational lineage_law_formula(const OffspringDistribution& mu, std::size_t n, std::size_t m,
                             const LineageVector& a) {
  return LineageLaw(mu, n).formula(n, m, a);
}

std::map<std::uint64_t, Rational> depth_law(const OffspringDistribution& mu, std::size_t n,
                                            std::size_t m) {
  return LineageLaw(mu, n).depth_law(n, m);
}

std::map<std::pair<LineageVector, std::uint64_t>, Rational> comparison_law(
    const OffspringDistribution& mu, std::size_t n, std::size_t m) {
  std::map<std::pair<LineageVector, std::uint64_t>, Rational> law;
  for (const auto& [h, ph] : depth_law(mu, n, m)) {
    for (const auto& a : lineage_vectors_of_total(mu.max_degree(), h)) {
      Rational q = multinomial_pmf(h, mu, a) * ph;
      if (q != 0) law.emplace(std::make_pair(a, h), std::move(q));
    }
  }
  return law;
}

Rational tv_distance(const OffspringDistribution& mu, std::size_t n, std::size_t m) {
  return LineageLaw(mu, n).tv_distance(n, m);
}

std::map<LineageVector, Rational> enumerated_lineage_law(const EnumeratedEnsemble& ensemble,
                                                         std::size_t m) {
  std::map<LineageVector, Rational> law;
  for (std::size_t i = 0; i < ensemble.trees.size(); ++i) {
    const auto a = lineage(ensemble.trees[i], static_cast<Node>(m), ensemble.max_degree);
    law[a] += ensemble.conditional(i);
  }
  return law;
}

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const IdentityCheck& VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw UsageError("no identity named " + name);
}

VerificationReport verify_identities(const OffspringDistribution& mu, const VerifyOptions& options) {
  const std::uint32_t K = mu.max_degree();
  const LineageFn lineage_fn =
      options.lineage_fn ? options.lineage_fn
                         : LineageFn([](const PlanarTree& t, Node v, std::uint32_t k) {
                             return lineage(t, v, k);
                           });

  IdentityCheck otter{"otter_forest_size", 0, true, {}};
  IdentityCheck total{"ensemble_total", 0, true, {}};
  IdentityCheck mj{"first_visit_plus_height", 0, true, {}};
  IdentityCheck depth_sum{"lineage_total_is_depth", 0, true, {}};
  IdentityCheck ancestry{"shape_preserves_ancestry", 0, true, {}};
  IdentityCheck eqdiff{"branch_content", 0, true, {}};
  IdentityCheck tere{"subtree_count", 0, true, {}};
  IdentityCheck fringe{"fringe_size", 0, true, {}};
  IdentityCheck law{"lineage_law", 0, true, {}};
  IdentityCheck depth_norm{"depth_law_sums_to_one", 0, true, {}};

  const std::size_t walk_max = std::max(options.otter_max_nodes, options.max_edges + 1);
  const WalkTable walks(mu, walk_max);
  for (std::uint32_t k = 1; k <= options.otter_max_roots; ++k) {
    for (std::size_t nodes = k; nodes <= options.otter_max_nodes; ++nodes) {
      ++otter.instances;
      const Rational lhs = enumerated_forest_probability(mu, k, nodes, options.cap);
      const Rational rhs = walks.forest_size_pmf(k, nodes);
      if (lhs != rhs) {
        fail(otter, "k=" + std::to_string(k) + " nodes=" + std::to_string(nodes) +
                        ": enumeration " + to_string(lhs) + " vs formula " + to_string(rhs));
      }
    }
  }

  std::optional<LineageLaw> closed_form;
  if (options.lineage_law) closed_form.emplace(mu, options.max_edges);

  for (std::size_t n = 0; n <= options.max_edges; ++n) {
    const EnumeratedEnsemble ens = enumerate(mu, n, options.cap);
    ++total.instances;
    if (ens.total != walks.tree_size_pmf(n + 1)) {
      fail(total, "n=" + std::to_string(n) + ": enumeration " + to_string(ens.total) +
                      " vs formula " + to_string(walks.tree_size_pmf(n + 1)));
    }
    if (ens.trees.empty()) continue;

    for (const PlanarTree& t : ens.trees) {
      const std::string tree_id = "tree " + seq_string(t.child_counts());
      const Encodings e = encodings(t);
      for (std::size_t k = 0; k <= n; ++k) {
        ++mj.instances;
        if (e.first_visit[k] + e.height[k] != 2 * k) {
          fail(mj, tree_id + " k=" + std::to_string(k) + ": " + std::to_string(e.first_visit[k]) +
                       " + " + std::to_string(e.height[k]) + " != " + std::to_string(2 * k));
        }
      }
      std::vector<LineageVector> lin;
      lin.reserve(t.size());
      for (Node v = 0; v < t.size(); ++v) {
        lin.push_back(lineage_fn(t, v, K));
        ++depth_sum.instances;
        if (lin.back().total() != t.depth(v)) {
          fail(depth_sum, tree_id + " node " + std::to_string(v) + ": lineage " +
                              lin.back().to_string() + " has total " +
                              std::to_string(lin.back().total()) + ", depth " +
                              std::to_string(t.depth(v)));
        }
      }

      // Marked subsets of size 1..kappa, lexicographic.
      std::vector<Node> marked;
      auto visit_subsets = [&](auto&& self, Node next) -> void {
        if (!marked.empty()) {
          const SpannedDecomposition d = spanned_decomposition(t, marked, K);
          const std::string where = tree_id + " marked " + nodes_string(marked);
          const std::size_t m = d.distinguished.size();
          for (Node x = 0; x < m; ++x) {
            for (Node y = 0; y < m; ++y) {
              ++ancestry.instances;
              if (t.is_ancestor_or_self(d.distinguished[x], d.distinguished[y]) !=
                  d.shape.is_ancestor_or_self(x, y)) {
                fail(ancestry, where + ": nodes " + std::to_string(d.distinguished[x]) + ", " +
                                   std::to_string(d.distinguished[y]));
              }
            }
          }
          for (const SpannedBranch& b : d.branches) {
            ++eqdiff.instances;
            const LineageVector& below = lin[b.bottom];
            const LineageVector& above = lin[b.top];
            const std::size_t own = TypeIndex::flat(t.child_count(b.top), t.direction(b.top, b.bottom));
            for (std::size_t i = 0; i < below.dimension(); ++i) {
              const auto expected = static_cast<std::int64_t>(below[i]) -
                                    static_cast<std::int64_t>(above[i]) - (i == own ? 1 : 0);
              if (expected != static_cast<std::int64_t>(b.content[i])) {
                auto [k, j] = TypeIndex::pair(i);
                fail(eqdiff, where + " branch (" + std::to_string(b.top) + "," +
                                 std::to_string(b.bottom) + ") entry (" + std::to_string(k) + "," +
                                 std::to_string(j) + "): content " + std::to_string(b.content[i]) +
                                 ", lineage difference " + std::to_string(expected));
                break;
              }
            }
          }
          const auto sub = sub_counts_from_shape(d);
          const auto fr = fringe_sizes_from_heights(d, t.edges());
          for (std::size_t l = 0; l < sub.size(); ++l) {
            ++tere.instances;
            ++fringe.instances;
            if (sub[l] != static_cast<std::int64_t>(d.sub_counts[l])) {
              fail(tere, where + " gap " + std::to_string(l) + ": direct " +
                             std::to_string(d.sub_counts[l]) + ", from shape " +
                             std::to_string(sub[l]));
            }
            if (fr[l] != static_cast<std::int64_t>(d.fringe_sizes[l])) {
              fail(fringe, where + " gap " + std::to_string(l) + ": direct " +
                               std::to_string(d.fringe_sizes[l]) + ", from ranks " +
                               std::to_string(fr[l]));
            }
          }
        }
        if (marked.size() == options.kappa) return;
        for (Node v = next; v <= n; ++v) {
          marked.push_back(v);
          self(self, v + 1);
          marked.pop_back();
        }
      };
      if (options.kappa > 0) visit_subsets(visit_subsets, 1);
    }

    if (closed_form) {
      for (std::size_t m = 0; m <= n; ++m) {
        const auto enumerated = enumerated_lineage_law(ens, m);
        Rational depth_total = 0;
        for (std::uint64_t h = 0; h <= m; ++h) {
          for (const auto& a : lineage_vectors_of_total(K, h)) {
            ++law.instances;
            const Rational f = closed_form->formula(n, m, a);
            auto it = enumerated.find(a);
            const Rational g = it == enumerated.end() ? Rational(0) : it->second;
            if (f != g) {
              fail(law, "n=" + std::to_string(n) + " m=" + std::to_string(m) + " a=" +
                            a.to_string() + ": formula " + to_string(f) + ", enumeration " +
                            to_string(g));
            }
            depth_total += f;
          }
        }
        ++depth_norm.instances;
        if (depth_total != 1) {
          fail(depth_norm, "n=" + std::to_string(n) + " m=" + std::to_string(m) + ": sum " +
                               to_string(depth_total));
        }
      }
    }
  }

  VerificationReport report;
  report.checks = {otter, total, mj, depth_sum, ancestry, eqdiff, tere, fringe};
  if (closed_form) {
    report.checks.push_back(law);
    report.checks.push_back(depth_norm);
  }
  return report;
}

}  // namespace gwsnake
