#include "gwsnake/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "gwsnake/error.hpp"
#include "gwsnake/harness.hpp"
#include "gwsnake/io.hpp"
#include "gwsnake/oracle.hpp"
#include "gwsnake/processes.hpp"
#include "gwsnake/sampler.hpp"

namespace gwsnake::cli {

namespace {

using nlohmann::json;

constexpr int kReportFormatVersion = 1;

// Writes to path, or to `out` when path is empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}

  std::ostream& stream() {
    if (path_.empty()) return fallback_;
    if (!file_) {
      file_ = std::make_unique<std::ofstream>(path_, std::ios::binary);
      if (!*file_) throw UsageError("cannot write " + path_);
    }
    return *file_;
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::unique_ptr<std::ofstream> file_;
};

void emit_json(const std::string& path, const json& doc, std::ostream& out) {
  if (path.empty()) {
    out << doc.dump(2) << '\n';
  } else {
    write_json_atomic(path, doc);
  }
}

json generator_json() { return {{"name", kGeneratorName}, {"version", kGeneratorVersion}}; }

struct SampleArgs {
  std::string model;
  std::size_t edges = 0;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::uint64_t max_attempts = SamplerOptions{}.max_attempts;
  std::string out;
};

int run_sample(const SampleArgs& a, std::ostream& out) {
  const Model model = load_model(a.model);
  SamplerOptions opts;
  opts.max_attempts = a.max_attempts;
  const PlanarTree t = sample_conditioned_tree(model.mu, a.edges, SeedSpec{a.seed, a.stream}, opts);
  json config = {{"command", "sample"},       {"model_path", a.model}, {"model", model.echo},
                 {"edges", a.edges},          {"seed", a.seed},        {"stream", a.stream},
                 {"generator", generator_json()}};
  emit_json(a.out, tree_to_json(t, config), out);
  return 0;
}

struct EncodeArgs {
  std::string tree;
  std::string path;
  std::string model;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::string out;
};

int run_encode(const EncodeArgs& a, std::ostream& out) {
  const json tree_doc = read_json(a.tree);
  const PlanarTree t = tree_from_json(tree_doc);
  const bool wants_labels = a.path == "labels" || a.path == "contour-labels";
  std::optional<Model> model;
  if (!a.model.empty()) model = load_model(a.model);
  if (wants_labels && (!model || !model->nu)) {
    throw UsageError("--path " + a.path +
                     " needs labels: pass --model with displacement laws (\"nu\") and --seed");
  }
  if (a.path == "lineage" && !model) throw UsageError("--path lineage needs --model (for mu)");

  std::optional<LabeledTree> lt;
  if (model && model->nu && (wants_labels || a.path == "nodes")) {
    lt = assign_labels(t, *model->nu, SeedSpec{a.seed, a.stream});
  }

  Sink sink(a.out, out);
  std::ostream& os = sink.stream();
  const std::size_t n = t.edges();
  if (a.path == "nodes") {
    write_node_csv(os, t, lt ? &lt->labels : nullptr);
  } else {
    if (n == 0) throw UsageError("paths need a tree with at least one edge");
    const Encodings e = encodings(t);
    const double root_n = std::sqrt(static_cast<double>(n));
    const double quarter_n = std::pow(static_cast<double>(n), 0.25);
    std::vector<std::string> header;
    std::vector<std::vector<double>> cols;
    auto grid = [&](std::size_t steps) {
      std::vector<double> s(steps + 1);
      for (std::size_t i = 0; i <= steps; ++i) s[i] = static_cast<double>(i) / steps;
      return s;
    };
    if (a.path == "height") {
      header = {"s", "H", "h"};
      cols = {grid(n), {}, {}};
      for (auto v : e.height) {
        cols[1].push_back(v);
        cols[2].push_back(v / root_n);
      }
    } else if (a.path == "contour") {
      header = {"s", "C", "c"};
      cols = {grid(2 * n), {}, {}};
      for (auto v : e.contour) {
        cols[1].push_back(v);
        cols[2].push_back(v / root_n);
      }
    } else if (a.path == "labels") {
      header = {"s", "R", "r"};
      cols = {grid(n), {}, {}};
      for (Node v = 0; v < t.size(); ++v) {
        cols[1].push_back(lt->labels[v]);
        cols[2].push_back(lt->labels[v] / quarter_n);
      }
    } else if (a.path == "contour-labels") {
      header = {"s", "R_contour", "r_contour"};
      cols = {grid(2 * n), {}, {}};
      for (Node v : depth_first_walk(t)) {
        cols[1].push_back(lt->labels[v]);
        cols[2].push_back(lt->labels[v] / quarter_n);
      }
    } else if (a.path == "lineage") {
      const VectorPath g = lineage_field(t, model->mu);
      header = {"s"};
      cols = {grid(n)};
      for (std::size_t idx = 0; idx < g.dimension(); ++idx) {
        header.push_back(field_name(idx));
        cols.push_back(g.component(idx).values());
      }
    }
    write_csv(os, header, cols);
  }

  if (!a.out.empty()) {
    json meta = {{"format_version", kTreeFormatVersion},
                 {"kind", "encode"},
                 {"config",
                  {{"command", "encode"},
                   {"tree_path", a.tree},
                   {"tree_config", tree_doc.value("config", json())},
                   {"path", a.path},
                   {"model_path", a.model},
                   {"model", model ? model->echo : json()},
                   {"seed", a.seed},
                   {"stream", a.stream},
                   {"generator", generator_json()}}},
                 {"csv", a.out}};
    write_json_atomic(a.out + ".meta.json", meta);
  }
  return 0;
}

struct VerifyArgs {
  std::string model;
  std::size_t max_edges = 7;
  std::uint32_t kappa = 3;
  std::size_t otter_nodes = 8;
  std::uint32_t otter_roots = 3;
  bool skip_law = false;
  std::string out;
};

int run_verify(const VerifyArgs& a, std::ostream& out) {
  const Model model = load_model(a.model, true);
  VerifyOptions opts;
  opts.max_edges = a.max_edges;
  opts.kappa = a.kappa;
  opts.otter_max_nodes = a.otter_nodes;
  opts.otter_max_roots = a.otter_roots;
  opts.lineage_law = !a.skip_law;
  const VerificationReport report = verify_identities(model.mu, opts);

  json checks = json::array();
  for (const auto& c : report.checks) {
    json entry = {{"name", c.name}, {"instances", c.instances}, {"passed", c.passed}};
    if (!c.passed) entry["counterexample"] = c.counterexample;
    checks.push_back(entry);
  }
  json doc = {{"format_version", kReportFormatVersion},
              {"kind", "verify_report"},
              {"config",
               {{"command", "verify"},
                {"model_path", a.model},
                {"model", model.echo},
                {"max_edges", a.max_edges},
                {"kappa", a.kappa},
                {"otter_max_nodes", a.otter_nodes},
                {"otter_max_roots", a.otter_roots},
                {"lineage_law", !a.skip_law}}},
              {"checks", checks},
              {"notes",
               {"lineage law normalized by P(|T| = n + 1), the size of the conditioned trees"}},
              {"all_passed", report.all_passed()}};
  emit_json(a.out, doc, out);
  return report.all_passed() ? 0 : 3;
}

struct McArgs {
  std::string model;
  std::size_t edges = 0;
  std::size_t replicas = 0;
  std::string grid = "0.2,0.5,0.8";
  std::string stats = "cov,ks,diag";
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::string out;
  std::string dump;
  std::size_t bootstrap = 200;
  double ks_floor = 0.05;
  bool full_windows = false;
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad grid point \"" + item + "\"");
    }
  }
  return out;
}

int run_mc(const McArgs& a, std::ostream& out) {
  const Model model = load_model(a.model);
  ExperimentConfig cfg;
  cfg.model_path = a.model;
  cfg.model_echo = model.echo;
  cfg.n_edges = a.edges;
  cfg.replicas = a.replicas;
  cfg.grid = parse_grid(a.grid);
  cfg.stats = parse_stats(a.stats);
  cfg.threads = a.threads;
  cfg.seed = a.seed;
  cfg.out = a.out;
  cfg.dump_dir = a.dump;
  cfg.bootstrap_resamples = a.bootstrap;
  cfg.ks_floor = a.ks_floor;
  cfg.full_windows = a.full_windows;
  const RunManifest m = run_ensemble(cfg, model.mu, model.nu ? &*model.nu : nullptr);
  emit_json(a.out, m.to_json(), out);
  const bool broken =
      m.identities.decomposition_failures > 0 || m.identities.lineage_identity_failures > 0;
  return broken ? 3 : 0;
}

std::string fixed(double x, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

void render_mc(const json& doc, std::ostream& out) {
  const json& cfg = doc.at("config");
  out << "Monte Carlo run: n = " << cfg.at("n_edges") << ", replicas = " << doc.at("replicas")
      << ", seed = " << cfg.at("seed") << "\n";
  out << "generator: " << doc.at("generator").at("name").get<std::string>() << " "
      << doc.at("generator").at("version").get<std::string>() << "\n";
  if (!doc.at("covariance").empty()) {
    out << "\ncovariance ratios\n";
    out << std::left << std::setw(8) << "A" << std::setw(6) << "s" << std::setw(8) << "B"
        << std::setw(6) << "t" << std::setw(10) << "ratio" << std::setw(9) << "se"
        << std::setw(9) << "target" << "ok\n";
    for (const auto& e : doc.at("covariance")) {
      out << std::left << std::setw(8) << e.at("a").get<std::string>() << std::setw(6)
          << fixed(e.at("s"), 2) << std::setw(8) << e.at("b").get<std::string>() << std::setw(6)
          << fixed(e.at("t"), 2) << std::setw(10) << fixed(e.at("ratio")) << std::setw(9)
          << fixed(e.at("se")) << std::setw(9) << fixed(e.at("target")) << (e.at("pass") ? "yes" : "NO")
          << "\n";
    }
  }
  if (!doc.at("ks").empty()) {
    out << "\nconditional normality\n";
    for (const auto& e : doc.at("ks")) {
      out << std::left << std::setw(8) << e.at("process").get<std::string>() << "s = "
          << fixed(e.at("s"), 2) << "  ";
      if (e.contains("error")) {
        out << "error: " << e.at("error").get<std::string>() << "\n";
        continue;
      }
      out << "KS " << fixed(e.at("statistic")) << "  mean " << fixed(e.at("mean")) << "  var "
          << fixed(e.at("variance")) << "  excluded " << e.at("excluded")
          << (e.at("flagged") ? "  FLAGGED" : "") << "\n";
    }
  }
  if (!doc.at("independence").empty()) {
    out << "\nindependence of r1 and r2\n";
    for (const auto& e : doc.at("independence")) {
      out << "s = " << fixed(e.at("s"), 2) << "  t = " << fixed(e.at("t"), 2) << "  ";
      if (e.at("degenerate")) {
        out << "degenerate (" << e.at("degenerate_component").get<std::string>() << " vanishes)\n";
      } else {
        out << "corr " << fixed(e.at("correlation")) << "  bound " << fixed(e.at("bound"))
            << (e.at("pass") ? "  ok" : "  NO") << "\n";
      }
    }
  }
  const json& id = doc.at("identities");
  if (id.at("decomposition_checked")) {
    out << "\npathwise identities\n"
        << "r = r1 + r2 + drift: max residual " << id.at("decomposition_max_residual")
        << ", failing replicas " << id.at("decomposition_failures") << "\n";
    if (id.at("lineage_identity_checked")) {
      out << "labels from lineage counts: max error " << id.at("lineage_identity_max_error")
          << ", failing replicas " << id.at("lineage_identity_failures") << "\n";
    }
  }
  if (doc.contains("diagnostics")) {
    const json& d = doc.at("diagnostics");
    out << "\ndiagnostics (medians)\n"
        << "max height increment / log n  " << fixed(d.at("median_max_increment_ratio")) << "\n"
        << "|u(n)| / log n                " << fixed(d.at("median_last_depth_ratio")) << "\n"
        << "lineage concentration         " << fixed(d.at("median_concentration")) << "\n"
        << "contour/height sup gap        " << fixed(d.at("median_sup_gap")) << "\n";
  }
  if (doc.contains("multinomial")) {
    out << "\nmultinomial fluctuations\n";
    for (const auto& r : doc.at("multinomial")) {
      out << "n = " << r.at("n") << ", h = " << r.at("h") << ": moment ratio "
          << fixed(r.at("moment_ratio")) << " (bound " << fixed(r.at("moment_bound")) << ")\n";
      for (const auto& e : r.at("covariance")) {
        out << "  cov(" << e.at("a").get<std::string>() << ", " << e.at("b").get<std::string>()
            << ") " << fixed(e.at("estimate")) << " vs " << fixed(e.at("target"))
            << (e.at("pass") ? "  ok" : "  NO") << "\n";
      }
    }
  }
}

void render_verify(const json& doc, std::ostream& out) {
  const json& cfg = doc.at("config");
  out << "identity checks up to " << cfg.at("max_edges") << " edges, kappa <= " << cfg.at("kappa")
      << "\n\n";
  out << std::left << std::setw(28) << "identity" << std::setw(12) << "instances" << "result\n";
  for (const auto& c : doc.at("checks")) {
    out << std::left << std::setw(28) << c.at("name").get<std::string>() << std::setw(12)
        << c.at("instances").get<std::uint64_t>() << (c.at("passed") ? "pass" : "FAIL") << "\n";
    if (!c.at("passed")) out << "    " << c.at("counterexample").get<std::string>() << "\n";
  }
  out << "\n" << (doc.at("all_passed") ? "all identities hold" : "some identities FAILED") << "\n";
}

void render_tree(const json& doc, std::ostream& out) {
  const PlanarTree t = tree_from_json(doc);
  out << "tree: " << t.edges() << " edges, height " << t.height() << ", max degree "
      << t.max_degree() << "\n";
}

int run_report(const std::string& path, std::ostream& out) {
  const json doc = read_json(path);
  const int version = doc.value("format_version", 0);
  if (version != 1) {
    throw ModelError(path + ": unsupported format_version " + std::to_string(version));
  }
  const std::string kind = doc.value("kind", std::string(doc.contains("child_counts") ? "tree" : ""));
  if (kind == "mc_run") {
    render_mc(doc, out);
  } else if (kind == "verify_report") {
    render_verify(doc, out);
  } else if (kind == "tree") {
    render_tree(doc, out);
  } else {
    throw ModelError(path + ": unknown artifact kind \"" + kind + "\"");
  }
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditioned Galton-Watson trees, their encodings and branching random walks"};
  app.name("gwsnake");
  app.require_subcommand(1);

  SampleArgs sample;
  auto* sc = app.add_subcommand("sample", "Sample a tree conditioned on its number of edges");
  sc->add_option("--model", sample.model, "Model JSON file")->required();
  sc->add_option("--edges", sample.edges, "Number of edges n")->required();
  sc->add_option("--seed", sample.seed, "Master seed")->capture_default_str();
  sc->add_option("--stream", sample.stream, "Stream index under the master seed")
      ->capture_default_str();
  sc->add_option("--max-attempts", sample.max_attempts, "Rejection budget for the count vector")
      ->capture_default_str();
  sc->add_option("--out", sample.out, "Output tree JSON (stdout if omitted)");

  EncodeArgs encode;
  auto* ec = app.add_subcommand("encode", "Write height, contour, label or lineage paths as CSV");
  ec->add_option("--tree", encode.tree, "Tree JSON file")->required();
  ec->add_option("--path", encode.path, "Which path to write")
      ->required()
      ->check(CLI::IsMember({"height", "contour", "labels", "contour-labels", "lineage", "nodes"}));
  ec->add_option("--model", encode.model, "Model JSON (needed for labels and lineage)");
  ec->add_option("--seed", encode.seed, "Seed for the label draw")->capture_default_str();
  ec->add_option("--stream", encode.stream, "Stream index for the label draw")
      ->capture_default_str();
  ec->add_option("--out", encode.out, "Output CSV (stdout if omitted)");

  VerifyArgs verify;
  auto* vc = app.add_subcommand("verify", "Check the exact identities on enumerated trees");
  vc->add_option("--model", verify.model, "Model JSON with rational strings")->required();
  vc->add_option("--max-edges", verify.max_edges, "Largest tree size")->capture_default_str();
  vc->add_option("--kappa", verify.kappa, "Largest number of marked nodes")->capture_default_str();
  vc->add_option("--otter-nodes", verify.otter_nodes, "Largest forest size in the forest check")
      ->capture_default_str();
  vc->add_option("--otter-roots", verify.otter_roots, "Largest number of forest roots")
      ->capture_default_str();
  vc->add_flag("--skip-lineage-law", verify.skip_law, "Skip the lineage law comparison");
  vc->add_option("--out", verify.out, "Output report JSON (stdout if omitted)");

  McArgs mc;
  auto* mcc = app.add_subcommand("mc", "Replicated Monte Carlo run");
  mcc->add_option("--model", mc.model, "Model JSON file")->required();
  mcc->add_option("--edges", mc.edges, "Number of edges n")->required();
  mcc->add_option("--replicas", mc.replicas, "Number of replicas R")->required();
  mcc->add_option("--grid", mc.grid, "Comma separated points of (0, 1)")->capture_default_str();
  mcc->add_option("--stats", mc.stats, "Any of cov,ks,indep,diag,mult")->capture_default_str();
  mcc->add_option("--threads", mc.threads, "Worker threads")->capture_default_str();
  mcc->add_option("--seed", mc.seed, "Master seed")->capture_default_str();
  mcc->add_option("--out", mc.out, "Output run JSON (stdout if omitted)");
  mcc->add_option("--dump-paths", mc.dump, "Directory for per-replica CSV paths");
  mcc->add_option("--bootstrap", mc.bootstrap, "Bootstrap resamples")->capture_default_str();
  mcc->add_option("--ks-floor", mc.ks_floor, "Exclude replicas with h_n(s) below this")
      ->capture_default_str();
  mcc->add_flag("--full-windows", mc.full_windows, "Scan every lineage window (quadratic)");

  std::string report_path;
  auto* rc = app.add_subcommand("report", "Render a tree, run or verification JSON as text");
  rc->add_option("file", report_path, "Artifact to render")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return static_cast<int>(ErrorKind::kUsage);
  }

  try {
    if (*sc) return run_sample(sample, out);
    if (*ec) return run_encode(encode, out);
    if (*vc) return run_verify(verify, out);
    if (*mcc) return run_mc(mc, out);
    if (*rc) return run_report(report_path, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kModel);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kUsage);
  }
  return static_cast<int>(ErrorKind::kUsage);
}

}  // namespace gwsnake::cli
