#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwsnake/distributions.hpp"
#include "gwsnake/processes.hpp"
#include "gwsnake/stats.hpp"

namespace gwsnake {

inline constexpr int kRunFormatVersion = 1;

struct StatSelection {
  bool cov = false;
  bool ks = false;
  bool indep = false;
  bool diag = false;
  bool mult = false;  // direct multinomial simulation, independent of trees
  bool labels() const { return cov || ks || indep; }
};

// Parses "cov,ks,indep,diag,mult"; throws UsageError on unknown names.
StatSelection parse_stats(const std::string& list);

struct ExperimentConfig {
  std::string model_path;
  nlohmann::json model_echo;
  std::size_t n_edges = 0;
  std::size_t replicas = 2;
  std::vector<double> grid{0.2, 0.5, 0.8};
  StatSelection stats;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
  std::string dump_dir;  // empty: no per-replica CSV
  double ks_floor = 0.05;
  std::size_t bootstrap_resamples = 200;
  std::uint64_t bootstrap_seed = 0xB007;
  double field_tolerance = 0.05;
  double label_tolerance = 0.1;
  bool full_windows = false;

  // Grid inside (0, 1), at least two replicas, at least one edge.
  void validate() const;
  nlohmann::json to_json() const;
};

// Per-replica functionals at the grid points.
struct ReplicaRecord {
  std::vector<double> h;     // h_n(s)
  std::vector<double> hmin;  // ȟ_n(s, t), grid x grid
  std::vector<double> g;     // G_{k,j}(s), grid x I_K
  std::vector<double> r, r1, r2;
  double decomposition_residual = 0.0;
  double lineage_identity_error = 0.0;  // deterministic displacements only
  std::optional<Diagnostics> diag;
};

struct EnsembleSamples {
  std::vector<double> grid;
  std::uint32_t max_degree = 0;
  std::vector<double> mu;  // probabilities 0..K
  bool labeled = false;
  std::vector<ReplicaRecord> records;

  std::size_t dimension() const { return TypeIndex::size(max_degree); }
};

struct CovarianceEntry {
  std::string a;
  double s;
  std::string b;
  double t;
  double mean_product = 0.0;
  double mean_hmin = 0.0;
  double ratio = 0.0;
  double se = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool degenerate = false;
  bool pass = false;
};

struct KsEntry {
  std::string process;
  double s = 0.0;
  double statistic = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::size_t included = 0;
  std::size_t excluded = 0;
  bool flagged = false;  // more than 5% below the floor
  std::string error;
};

struct IndependenceEntry {
  double s = 0.0;
  double t = 0.0;
  double correlation = 0.0;
  double se = 0.0;
  double bound = 0.0;  // 3 / sqrt(R)
  bool degenerate = false;
  std::string degenerate_component;
  bool pass = false;
};

struct IdentitySummary {
  bool decomposition_checked = false;
  double decomposition_max_residual = 0.0;
  std::size_t decomposition_failures = 0;  // replicas above 1e-9
  bool lineage_identity_checked = false;
  double lineage_identity_max_error = 0.0;
  std::size_t lineage_identity_failures = 0;  // replicas with a nonzero error
};

struct DiagnosticsSummary {
  double median_max_increment_ratio = 0.0;
  double median_last_depth_ratio = 0.0;
  double median_concentration = 0.0;
  double median_sup_gap = 0.0;
  double mean_sup_gap = 0.0;
};

struct MultinomialEntry {
  std::string a;
  std::string b;
  double estimate = 0.0;
  double se = 0.0;
  double target = 0.0;
  bool pass = false;
};

struct MultinomialReport {
  std::size_t n = 0;
  std::uint64_t h = 0;
  std::vector<MultinomialEntry> covariance;
  double moment_ratio = 0.0;  // E|G|_1^2 / (h / sqrt(n))
  double moment_bound = 0.0;  // #I_K sum p (1 - p)
};

struct RunManifest {
  ExperimentConfig config;
  std::size_t replicas = 0;
  std::vector<CovarianceEntry> covariance;
  std::vector<KsEntry> ks;
  std::vector<IndependenceEntry> independence;
  IdentitySummary identities;
  std::optional<DiagnosticsSummary> diagnostics;
  std::vector<MultinomialReport> multinomial;
  double wall_clock_seconds = 0.0;

  // Everything except metadata is reproducible bit for bit.
  nlohmann::json to_json(bool with_metadata = true) const;
};

std::string field_name(std::size_t idx);  // "G_2_1"

// Samples the replicas (replica i on stream i) and keeps the grid values.
EnsembleSamples sample_ensemble(const ExperimentConfig& cfg, const OffspringDistribution& mu,
                                const DisplacementFamily* nu);

std::vector<CovarianceEntry> covariance_ratios(const EnsembleSamples& samples, double beta2,
                                               const BootstrapPlan& plan, double field_tolerance,
                                               double label_tolerance);
// process: "r" or a field name. Throws UsageError with fewer than 100 kept replicas.
KsEntry ks_normality(const EnsembleSamples& samples, std::size_t grid_index,
                     const std::string& process, double variance_constant, double floor);
IndependenceEntry independence_check(const EnsembleSamples& samples, std::size_t s_index,
                                     std::size_t t_index, const MomentSummary& ms,
                                     const BootstrapPlan& plan);

RunManifest run_ensemble(const ExperimentConfig& cfg, const OffspringDistribution& mu,
                         const DisplacementFamily* nu);

// Writes to a temporary file next to path, then renames.
void write_json_atomic(const std::string& path, const nlohmann::json& doc);

// Direct simulation of n^(-1/4) (M^(h) - h p), M^(h) multinomial on I_K.
MultinomialReport multinomial_limit_check(const OffspringDistribution& mu, std::size_t n,
                                          std::uint64_t h, std::size_t replicas,
                                          std::uint64_t seed);

}  // namespace gwsnake
