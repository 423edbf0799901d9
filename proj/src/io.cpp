#include "gwsnake/io.hpp"

#include <charconv>
#include <fstream>

#include "gwsnake/error.hpp"

namespace gwsnake {

namespace {

using nlohmann::json;

struct Value {
  Rational exact;
  double approx = 0.0;
  bool is_exact = true;
};

Value read_value(const json& v, bool require_exact, const std::string& where) {
  if (v.is_string()) {
    Value out;
    out.exact = parse_rational(v.get<std::string>());
    out.approx = to_double(out.exact);
    return out;
  }
  if (v.is_number_integer()) {
    Value out;
    out.exact = Rational(v.get<long>());
    out.approx = to_double(out.exact);
    return out;
  }
  if (v.is_number()) {
    if (require_exact) {
      throw ModelError(where + ": exact mode needs probabilities as strings such as \"1/2\"");
    }
    Value out;
    out.approx = v.get<double>();
    out.exact = Rational(out.approx);
    out.is_exact = false;
    return out;
  }
  throw ModelError(where + ": expected a number or a numeric string");
}

}  // namespace

Model parse_model(const json& doc, bool require_exact) {
  if (!doc.is_object() || !doc.contains("mu")) throw ModelError("model file has no \"mu\" entry");
  const json& mu_doc = doc.at("mu");
  const json& probs = mu_doc.is_object() ? mu_doc.value("probs", json()) : mu_doc;
  if (!probs.is_array() || probs.empty()) throw ModelError("\"mu.probs\" must be a non-empty array");

  std::vector<Value> values;
  bool exact = true;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    values.push_back(read_value(probs[k], require_exact, "mu.probs[" + std::to_string(k) + "]"));
    exact = exact && values.back().is_exact;
  }
  Model model;
  if (exact) {
    std::vector<Rational> p;
    for (auto& v : values) p.push_back(v.exact);
    model.mu = OffspringDistribution::exact(std::move(p));
  } else {
    std::vector<double> p;
    for (auto& v : values) p.push_back(v.approx);
    model.mu = OffspringDistribution::floating(std::move(p));
  }

  if (doc.contains("nu") && !doc.at("nu").is_null()) {
    const json& nu_doc = doc.at("nu");
    if (!nu_doc.is_object()) throw ModelError("\"nu\" must map arities to atom lists");
    DisplacementFamily nu;
    for (const auto& [key, atoms_doc] : nu_doc.items()) {
      std::uint32_t arity = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), arity);
      if (ec != std::errc() || ptr != key.data() + key.size() || arity == 0) {
        throw ModelError("\"nu\" key \"" + key + "\" is not a positive arity");
      }
      if (!atoms_doc.is_array()) throw ModelError("nu." + key + " must be a list of atoms");
      std::vector<DisplacementAtom> atoms;
      bool law_exact = true;
      for (std::size_t i = 0; i < atoms_doc.size(); ++i) {
        const json& a = atoms_doc[i];
        const std::string where = "nu." + key + "[" + std::to_string(i) + "]";
        if (!a.is_object() || !a.contains("v") || !a.contains("p") || !a.at("v").is_array()) {
          throw ModelError(where + " must look like {\"v\": [...], \"p\": \"...\"}");
        }
        DisplacementAtom atom;
        const Value p = read_value(a.at("p"), require_exact, where + ".p");
        atom.prob = p.exact;
        atom.prob_d = p.approx;
        law_exact = law_exact && p.is_exact;
        for (const auto& x : a.at("v")) {
          const Value c = read_value(x, require_exact, where + ".v");
          atom.shift.push_back(c.exact);
          atom.shift_d.push_back(c.approx);
          law_exact = law_exact && c.is_exact;
        }
        atoms.push_back(std::move(atom));
      }
      nu.set(arity, std::move(atoms), law_exact);
    }
    model.nu = std::move(nu);
  }
  model.echo = doc;
  return model;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ModelError(path + ": " + e.what());
  }
}

Model load_model(const std::string& path, bool require_exact) {
  return parse_model(read_json(path), require_exact);
}

json tree_to_json(const PlanarTree& t, const json& config) {
  json doc;
  doc["format_version"] = kTreeFormatVersion;
  doc["n_edges"] = t.edges();
  doc["child_counts"] = std::vector<std::uint32_t>(t.child_counts().begin(), t.child_counts().end());
  doc["config"] = config;
  return doc;
}

PlanarTree tree_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("child_counts")) {
    throw ModelError("tree file has no \"child_counts\" entry");
  }
  std::vector<std::uint32_t> seq;
  try {
    seq = doc.at("child_counts").get<std::vector<std::uint32_t>>();
  } catch (const json::exception& e) {
    throw ModelError(std::string("\"child_counts\": ") + e.what());
  }
  PlanarTree t = PlanarTree::from_child_counts(seq);
  if (doc.contains("n_edges") && doc.at("n_edges").get<std::size_t>() != t.edges()) {
    throw ModelError("\"n_edges\" disagrees with the child counts");
  }
  return t;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out << (c ? "," : "") << format_double(columns[c][r]);
    }
    out << '\n';
  }
}

void write_node_csv(std::ostream& out, const PlanarTree& t, const std::vector<double>* labels) {
  out << "rank,parent,depth,child_index,word" << (labels ? ",label" : "") << '\n';
  for (Node v = 0; v < t.size(); ++v) {
    out << v << ',';
    if (v != 0) out << t.parent(v);
    out << ',' << t.depth(v) << ',' << t.child_index(v) << ',' << t.word(v);
    if (labels) out << ',' << format_double((*labels)[v]);
    out << '\n';
  }
}

}  // namespace gwsnake
