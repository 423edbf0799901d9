#include "gwsnake/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "gwsnake/error.hpp"
#include "gwsnake/io.hpp"
#include "gwsnake/rng.hpp"
#include "gwsnake/sampler.hpp"

namespace gwsnake {

using nlohmann::json;

StatSelection parse_stats(const std::string& list) {
  StatSelection s;
  std::stringstream in(list);
  std::string name;
  while (std::getline(in, name, ',')) {
    if (name == "cov") s.cov = true;
    else if (name == "ks") s.ks = true;
    else if (name == "indep") s.indep = true;
    else if (name == "diag") s.diag = true;
    else if (name == "mult") s.mult = true;
    else if (!name.empty()) throw UsageError("unknown statistic \"" + name + "\"");
  }
  return s;
}

void ExperimentConfig::validate() const {
  if (n_edges < 2) throw UsageError("--edges must be at least 2");
  if (replicas < 2) throw UsageError("--replicas must be at least 2");
  if (grid.empty()) throw UsageError("--grid is empty");
  for (double s : grid) {
    if (!(s > 0.0 && s < 1.0)) throw UsageError("grid point " + format_double(s) + " not in (0, 1)");
  }
  if (threads == 0) throw UsageError("--threads must be positive");
  if (bootstrap_resamples < 200) throw UsageError("--bootstrap must be at least 200");
}

json ExperimentConfig::to_json() const {
  return {{"model_path", model_path},
          {"model", model_echo},
          {"n_edges", n_edges},
          {"replicas", replicas},
          {"grid", grid},
          {"stats",
           {{"cov", stats.cov},
            {"ks", stats.ks},
            {"indep", stats.indep},
            {"diag", stats.diag},
            {"mult", stats.mult}}},
          {"seed", seed},
          {"threads", threads},
          {"dump_paths", dump_dir},
          {"ks_floor", ks_floor},
          {"bootstrap_resamples", bootstrap_resamples},
          {"bootstrap_seed", bootstrap_seed},
          {"field_tolerance", field_tolerance},
          {"label_tolerance", label_tolerance},
          {"full_windows", full_windows}};
}

std::string field_name(std::size_t idx) {
  const auto [k, j] = TypeIndex::pair(idx);
  return "G_" + std::to_string(k) + "_" + std::to_string(j);
}

namespace {

bool deterministic(const DisplacementFamily& nu) {
  for (const auto& [k, atoms] : nu.laws()) {
    if (atoms.size() != 1) return false;
  }
  return true;
}

void dump_replica(const std::string& dir, std::size_t index, const HeightPaths& hp,
                  const VectorPath& g, const LabelDecomposition* dec) {
  const std::size_t n = g.steps();
  std::vector<std::string> header{"s", "h"};
  std::vector<std::vector<double>> cols(2);
  for (std::size_t i = 0; i <= n; ++i) {
    cols[0].push_back(static_cast<double>(i) / n);
    cols[1].push_back(hp.h[i]);
  }
  if (dec) {
    header.insert(header.end(), {"r", "r1", "r2"});
    cols.push_back(dec->r.values());
    cols.push_back(dec->r1.values());
    cols.push_back(dec->r2.values());
  }
  for (std::size_t idx = 0; idx < g.dimension(); ++idx) {
    header.push_back(field_name(idx));
    cols.push_back(g.component(idx).values());
  }
  char name[32];
  std::snprintf(name, sizeof name, "replica_%06zu.csv", index);
  std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
  if (!out) throw UsageError("cannot write into " + dir);
  write_csv(out, header, cols);
}

}  // namespace

EnsembleSamples sample_ensemble(const ExperimentConfig& cfg, const OffspringDistribution& mu,
                                const DisplacementFamily* nu) {
  cfg.validate();
  check_attainable(mu, cfg.n_edges);
  EnsembleSamples out;
  out.grid = cfg.grid;
  out.max_degree = mu.max_degree();
  out.mu.assign(mu.probs().begin(), mu.probs().end());
  out.labeled = nu != nullptr;
  out.records.resize(cfg.replicas);
  if (!cfg.dump_dir.empty()) std::filesystem::create_directories(cfg.dump_dir);

  std::optional<MomentSummary> ms;
  if (nu) ms = moments(mu, *nu);
  const bool exact_identity = nu && deterministic(*nu);
  const std::size_t gsize = cfg.grid.size();
  const std::size_t dim = out.dimension();

  auto run_one = [&](std::size_t i) {
    Rng rng(derive_stream(cfg.seed, i));
    const PlanarTree tree = sample_conditioned_tree(mu, cfg.n_edges, rng);
    ReplicaRecord& rec = out.records[i];
    const HeightPaths hp = height_paths(tree);
    const VectorPath g = lineage_field(tree, mu);
    rec.h.resize(gsize);
    rec.hmin.resize(gsize * gsize);
    rec.g.resize(gsize * dim);
    for (std::size_t a = 0; a < gsize; ++a) {
      rec.h[a] = hp.h.evaluate(cfg.grid[a]);
      for (std::size_t b = 0; b < gsize; ++b) {
        rec.hmin[a * gsize + b] = path_min(hp.h, cfg.grid[a], cfg.grid[b]);
      }
      for (std::size_t idx = 0; idx < dim; ++idx) rec.g[a * dim + idx] = g.evaluate(cfg.grid[a], idx);
    }
    std::optional<LabelDecomposition> dec;
    if (nu) {
      const LabeledTree lt = assign_labels(tree, *nu, rng);
      dec = label_decomposition(lt, mu, *ms);
      rec.decomposition_residual = dec->residual;
      for (double s : cfg.grid) {
        rec.r.push_back(dec->r.evaluate(s));
        rec.r1.push_back(dec->r1.evaluate(s));
        rec.r2.push_back(dec->r2.evaluate(s));
      }
      if (exact_identity) {
        // Labels against the lineage counts weighted by the displacements.
        for (Node v = 0; v < tree.size(); ++v) {
          double expected = static_cast<double>(tree.depth(v)) * ms->global_mean;
          for (std::size_t idx = 0; idx < dim; ++idx) expected += g.raw(v, idx) * ms->mean_kj[idx];
          rec.lineage_identity_error =
              std::max(rec.lineage_identity_error, std::abs(lt.labels[v] - expected));
        }
      }
    }
    if (cfg.stats.diag) rec.diag = diagnostics(tree, mu, cfg.full_windows);
    if (!cfg.dump_dir.empty()) dump_replica(cfg.dump_dir, i, hp, g, dec ? &*dec : nullptr);
  };

  std::vector<std::exception_ptr> errors(cfg.replicas);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cfg.replicas || stop.load()) return;
      try {
        run_one(i);
      } catch (...) {
        errors[i] = std::current_exception();
        stop.store(true);
      }
    }
  };
  const unsigned workers = std::min<std::size_t>(cfg.threads, cfg.replicas);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < cfg.replicas; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const BudgetError& e) {
      throw BudgetError("replica " + std::to_string(i) + ": " + e.what(), e.attempts());
    } catch (const Error& e) {
      throw Error(e.kind(), "replica " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<CovarianceEntry> covariance_ratios(const EnsembleSamples& samples, double beta2,
                                               const BootstrapPlan& plan, double field_tolerance,
                                               double label_tolerance) {
  const std::size_t R = samples.records.size();
  const std::size_t gsize = samples.grid.size();
  const std::size_t dim = samples.dimension();
  std::vector<CovarianceEntry> out;
  std::vector<double> num(R), den(R);

  auto finish = [&](CovarianceEntry e) {
    double sn = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < R; ++i) {
      sn += num[i];
      sd += den[i];
    }
    e.mean_product = sn / R;
    e.mean_hmin = sd / R;
    e.degenerate = !(e.mean_hmin > 1e-9);
    if (!e.degenerate) {
      e.ratio = sn / sd;
      e.se = plan.ratio_se(num, den);
    }
    e.pass = !e.degenerate && std::abs(e.ratio - e.target) <= std::max(3.0 * e.se, e.tolerance);
    out.push_back(std::move(e));
  };

  if (samples.labeled) {
    for (std::size_t a = 0; a < gsize; ++a) {
      for (std::size_t b = 0; b < gsize; ++b) {
        for (std::size_t i = 0; i < R; ++i) {
          const auto& rec = samples.records[i];
          num[i] = rec.r[a] * rec.r[b];
          den[i] = rec.hmin[a * gsize + b];
        }
        finish({"r", samples.grid[a], "r", samples.grid[b], 0, 0, 0, 0, beta2, label_tolerance,
                false, false});
      }
    }
  }
  std::vector<std::size_t> charged;
  for (std::size_t idx = 0; idx < dim; ++idx) {
    if (samples.mu[TypeIndex::pair(idx).first] > 0.0) charged.push_back(idx);
  }
  for (std::size_t p : charged) {
    for (std::size_t q : charged) {
      const double mp = samples.mu[TypeIndex::pair(p).first];
      const double mq = samples.mu[TypeIndex::pair(q).first];
      const double target = -mp * mq + (p == q ? mp : 0.0);
      for (std::size_t a = 0; a < gsize; ++a) {
        for (std::size_t b = 0; b < gsize; ++b) {
          for (std::size_t i = 0; i < R; ++i) {
            const auto& rec = samples.records[i];
            num[i] = rec.g[a * dim + p] * rec.g[b * dim + q];
            den[i] = rec.hmin[a * gsize + b];
          }
          finish({field_name(p), samples.grid[a], field_name(q), samples.grid[b], 0, 0, 0, 0,
                  target, field_tolerance, false, false});
        }
      }
    }
  }
  return out;
}

KsEntry ks_normality(const EnsembleSamples& samples, std::size_t grid_index,
                     const std::string& process, double variance_constant, double floor) {
  const std::size_t dim = samples.dimension();
  std::optional<std::size_t> field;
  if (process != "r") {
    for (std::size_t idx = 0; idx < dim; ++idx) {
      if (field_name(idx) == process) field = idx;
    }
    if (!field) throw UsageError("unknown process " + process);
  } else if (!samples.labeled) {
    throw UsageError("normality of r needs displacement laws in the model");
  }
  KsEntry e;
  e.process = process;
  e.s = samples.grid[grid_index];
  std::vector<double> z;
  for (const auto& rec : samples.records) {
    const double h = rec.h[grid_index];
    if (h < floor) {
      ++e.excluded;
      continue;
    }
    const double v = field ? rec.g[grid_index * dim + *field] : rec.r[grid_index];
    z.push_back(v / std::sqrt(variance_constant * h));
  }
  e.included = z.size();
  e.flagged = e.excluded > 0.05 * samples.records.size();
  if (z.size() < 100) {
    throw UsageError("normality test of " + process + " at s = " + format_double(e.s) + " kept " +
                     std::to_string(z.size()) + " replicas, needs at least 100");
  }
  e.mean = mean(z);
  e.variance = variance(z);
  e.statistic = ks_statistic_normal(std::move(z));
  return e;
}

IndependenceEntry independence_check(const EnsembleSamples& samples, std::size_t s_index,
                                     std::size_t t_index, const MomentSummary& ms,
                                     const BootstrapPlan& plan) {
  if (!samples.labeled) throw UsageError("the independence check needs displacement laws");
  IndependenceEntry e;
  e.s = samples.grid[s_index];
  e.t = samples.grid[t_index];
  const std::size_t R = samples.records.size();
  e.bound = 3.0 / std::sqrt(static_cast<double>(R));
  bool r1_zero = true, r2_zero = true;
  for (std::size_t idx = 0; idx < ms.mean_kj.size(); ++idx) {
    if (samples.mu[TypeIndex::pair(idx).first] <= 0.0) continue;
    if (ms.var_kj[idx] > 1e-12) r1_zero = false;
    if (std::abs(ms.mean_kj[idx]) > 1e-12) r2_zero = false;
  }
  if (r1_zero || r2_zero) {
    e.degenerate = true;
    e.degenerate_component = r1_zero ? "r1" : "r2";
    return e;
  }
  std::vector<double> x(R), y(R);
  for (std::size_t i = 0; i < R; ++i) {
    x[i] = samples.records[i].r1[s_index];
    y[i] = samples.records[i].r2[t_index];
  }
  e.correlation = correlation(x, y);
  e.se = plan.correlation_se(x, y);
  e.pass = std::abs(e.correlation) < e.bound;
  return e;
}

MultinomialReport multinomial_limit_check(const OffspringDistribution& mu, std::size_t n,
                                          std::uint64_t h, std::size_t replicas,
                                          std::uint64_t seed) {
  const std::uint32_t K = mu.max_degree();
  const std::size_t dim = TypeIndex::size(K);
  std::vector<double> p(dim);
  for (std::size_t idx = 0; idx < dim; ++idx) p[idx] = mu[TypeIndex::pair(idx).first];
  const double scale = 1.0 / std::pow(static_cast<double>(n), 0.25);
  const double lambda = static_cast<double>(h) / std::sqrt(static_cast<double>(n));

  std::vector<double> g(replicas * dim, 0.0);
  std::vector<double> l1(replicas, 0.0);
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(derive_stream(seed, r));
    std::uint64_t left = h;
    double rest = 1.0;
    for (std::size_t idx = 0; idx < dim; ++idx) {
      std::uint64_t c = 0;
      if (left > 0 && p[idx] > 0.0) {
        const double q = idx + 1 == dim ? 1.0 : std::min(1.0, p[idx] / rest);
        if (q >= 1.0) {
          c = left;
        } else {
          std::binomial_distribution<std::uint64_t> bin(left, q);
          c = bin(rng);
        }
      }
      rest -= p[idx];
      left -= c;
      const double v = scale * (static_cast<double>(c) - p[idx] * static_cast<double>(h));
      g[r * dim + idx] = v;
      l1[r] += std::abs(v);
    }
  }

  MultinomialReport rep;
  rep.n = n;
  rep.h = h;
  for (std::size_t a = 0; a < dim; ++a) {
    if (p[a] <= 0.0) continue;
    for (std::size_t b = a; b < dim; ++b) {
      if (p[b] <= 0.0) continue;
      std::vector<double> prod(replicas);
      for (std::size_t r = 0; r < replicas; ++r) prod[r] = g[r * dim + a] * g[r * dim + b];
      MultinomialEntry e;
      e.a = field_name(a);
      e.b = field_name(b);
      e.estimate = mean(prod);
      e.se = std::sqrt(variance(prod) / static_cast<double>(replicas));
      e.target = lambda * (-p[a] * p[b] + (a == b ? p[a] : 0.0));
      e.pass = std::abs(e.estimate - e.target) <= 3.0 * e.se + 1e-12;
      rep.covariance.push_back(e);
    }
  }
  double second = 0.0;
  for (double x : l1) second += x * x;
  second /= static_cast<double>(replicas);
  rep.moment_ratio = lambda > 0.0 ? second / lambda : 0.0;
  double spread = 0.0;
  for (double q : p) spread += q * (1.0 - q);
  rep.moment_bound = static_cast<double>(dim) * spread;
  return rep;
}

RunManifest run_ensemble(const ExperimentConfig& cfg, const OffspringDistribution& mu,
                         const DisplacementFamily* nu) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  std::optional<MomentSummary> ms;
  if (cfg.stats.labels() && nu) {
    ms = moments(mu, *nu);
    if (!ms->globally_centered) {
      throw ModelError("label statistics need a globally centered displacement family (m = " +
                       format_double(ms->global_mean) + ")");
    }
    if (ms->degenerate) throw ModelError("label statistics need beta^2 > 0");
  }
  if (cfg.stats.indep && !nu) throw UsageError("--stats indep needs \"nu\" in the model");

  RunManifest m;
  m.config = cfg;
  m.replicas = cfg.replicas;
  const DisplacementFamily* labels = cfg.stats.labels() ? nu : nullptr;
  const EnsembleSamples samples = sample_ensemble(cfg, mu, labels);
  const BootstrapPlan plan(cfg.replicas, cfg.bootstrap_resamples, cfg.bootstrap_seed);

  if (samples.labeled) {
    m.identities.decomposition_checked = true;
    m.identities.lineage_identity_checked = deterministic(*nu);
    for (const auto& rec : samples.records) {
      m.identities.decomposition_max_residual =
          std::max(m.identities.decomposition_max_residual, rec.decomposition_residual);
      if (rec.decomposition_residual > 1e-9) ++m.identities.decomposition_failures;
      m.identities.lineage_identity_max_error =
          std::max(m.identities.lineage_identity_max_error, rec.lineage_identity_error);
      if (rec.lineage_identity_error != 0.0) ++m.identities.lineage_identity_failures;
    }
  }
  if (cfg.stats.cov) {
    m.covariance = covariance_ratios(samples, ms ? ms->global_second : 0.0, plan,
                                     cfg.field_tolerance, cfg.label_tolerance);
  }
  if (cfg.stats.ks) {
    for (std::size_t a = 0; a < cfg.grid.size(); ++a) {
      std::vector<std::pair<std::string, double>> targets;
      if (samples.labeled) targets.emplace_back("r", ms->global_second);
      for (std::size_t idx = 0; idx < samples.dimension(); ++idx) {
        const double pk = samples.mu[TypeIndex::pair(idx).first];
        if (pk > 0.0 && pk < 1.0) targets.emplace_back(field_name(idx), pk - pk * pk);
      }
      for (const auto& [name, c] : targets) {
        try {
          m.ks.push_back(ks_normality(samples, a, name, c, cfg.ks_floor));
        } catch (const UsageError& e) {
          KsEntry bad;
          bad.process = name;
          bad.s = cfg.grid[a];
          bad.error = e.what();
          m.ks.push_back(bad);
        }
      }
    }
  }
  if (cfg.stats.indep) {
    for (std::size_t a = 0; a < cfg.grid.size(); ++a) {
      for (std::size_t b = 0; b < cfg.grid.size(); ++b) {
        m.independence.push_back(independence_check(samples, a, b, *ms, plan));
      }
    }
  }
  if (cfg.stats.diag) {
    std::vector<double> inc, last, conc, gap;
    for (const auto& rec : samples.records) {
      inc.push_back(rec.diag->max_increment_ratio);
      last.push_back(rec.diag->last_depth_ratio);
      conc.push_back(rec.diag->concentration);
      gap.push_back(rec.diag->sup_gap);
    }
    DiagnosticsSummary d;
    d.median_max_increment_ratio = median(inc);
    d.median_last_depth_ratio = median(last);
    d.median_concentration = median(conc);
    d.median_sup_gap = median(gap);
    d.mean_sup_gap = mean(gap);
    m.diagnostics = d;
  }
  if (cfg.stats.mult) {
    const double root = std::sqrt(static_cast<double>(cfg.n_edges));
    for (double lambda : {1.0, 4.0}) {
      m.multinomial.push_back(multinomial_limit_check(
          mu, cfg.n_edges, static_cast<std::uint64_t>(std::floor(lambda * root)), cfg.replicas,
          cfg.seed ^ 0x6D756C74ULL));
    }
  }
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

json RunManifest::to_json(bool with_metadata) const {
  json doc;
  doc["format_version"] = kRunFormatVersion;
  doc["kind"] = "mc_run";
  doc["config"] = config.to_json();
  doc["generator"] = {{"name", kGeneratorName}, {"version", kGeneratorVersion}};
  doc["replicas"] = replicas;

  json cov = json::array();
  for (const auto& e : covariance) {
    cov.push_back({{"a", e.a},
                   {"s", e.s},
                   {"b", e.b},
                   {"t", e.t},
                   {"mean_product", e.mean_product},
                   {"mean_hmin", e.mean_hmin},
                   {"ratio", e.ratio},
                   {"se", e.se},
                   {"target", e.target},
                   {"tolerance", e.tolerance},
                   {"degenerate", e.degenerate},
                   {"pass", e.pass}});
  }
  doc["covariance"] = cov;

  json ks_doc = json::array();
  for (const auto& e : ks) {
    json k = {{"process", e.process}, {"s", e.s}};
    if (!e.error.empty()) {
      k["error"] = e.error;
    } else {
      k.update({{"statistic", e.statistic},
                {"mean", e.mean},
                {"variance", e.variance},
                {"included", e.included},
                {"excluded", e.excluded},
                {"flagged", e.flagged}});
    }
    ks_doc.push_back(k);
  }
  doc["ks"] = ks_doc;

  json ind = json::array();
  for (const auto& e : independence) {
    json i = {{"s", e.s}, {"t", e.t}, {"degenerate", e.degenerate}};
    if (e.degenerate) {
      i["degenerate_component"] = e.degenerate_component;
    } else {
      i.update({{"correlation", e.correlation}, {"se", e.se}, {"bound", e.bound}, {"pass", e.pass}});
    }
    ind.push_back(i);
  }
  doc["independence"] = ind;

  doc["identities"] = {{"decomposition_checked", identities.decomposition_checked},
                       {"decomposition_max_residual", identities.decomposition_max_residual},
                       {"decomposition_failures", identities.decomposition_failures},
                       {"lineage_identity_checked", identities.lineage_identity_checked},
                       {"lineage_identity_max_error", identities.lineage_identity_max_error},
                       {"lineage_identity_failures", identities.lineage_identity_failures}};
  if (diagnostics) {
    doc["diagnostics"] = {{"median_max_increment_ratio", diagnostics->median_max_increment_ratio},
                          {"median_last_depth_ratio", diagnostics->median_last_depth_ratio},
                          {"median_concentration", diagnostics->median_concentration},
                          {"median_sup_gap", diagnostics->median_sup_gap},
                          {"mean_sup_gap", diagnostics->mean_sup_gap}};
  }
  if (!multinomial.empty()) {
    json mult = json::array();
    for (const auto& r : multinomial) {
      json entries = json::array();
      for (const auto& e : r.covariance) {
        entries.push_back({{"a", e.a},
                           {"b", e.b},
                           {"estimate", e.estimate},
                           {"se", e.se},
                           {"target", e.target},
                           {"pass", e.pass}});
      }
      mult.push_back({{"n", r.n},
                      {"h", r.h},
                      {"covariance", entries},
                      {"moment_ratio", r.moment_ratio},
                      {"moment_bound", r.moment_bound}});
    }
    doc["multinomial"] = mult;
  }
  if (with_metadata) doc["metadata"] = {{"wall_clock_seconds", wall_clock_seconds}};
  return doc;
}

void write_json_atomic(const std::string& path, const json& doc) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw UsageError("cannot write " + tmp.string());
    out << doc.dump(2) << '\n';
    if (!out) throw UsageError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

}  // namespace gwsnake
