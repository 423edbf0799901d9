#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwsnake/distributions.hpp"
#include "gwsnake/tree.hpp"

namespace gwsnake {

inline constexpr int kTreeFormatVersion = 1;

struct Model {
  OffspringDistribution mu = OffspringDistribution::binary();
  std::optional<DisplacementFamily> nu;
  nlohmann::json echo;  // the document as read
};

// {"mu": {"probs": [...]}, "nu": {"2": [{"v": [1, -1], "p": "1"}]}}.
// Strings are read exactly ("1/2", "0.25"); JSON numbers make the model
// floating. With require_exact, numbers are rejected (ModelError).
Model parse_model(const nlohmann::json& doc, bool require_exact = false);
Model load_model(const std::string& path, bool require_exact = false);

nlohmann::json read_json(const std::string& path);

// {"format_version", "n_edges", "child_counts", "config"}.
nlohmann::json tree_to_json(const PlanarTree& t, const nlohmann::json& config);
PlanarTree tree_from_json(const nlohmann::json& doc);

// Shortest text that reads back to the same double.
std::string format_double(double x);

// Header row, '.' decimals, LF line endings.
void write_csv(std::ostream& out, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

// rank, parent, depth, child_index, word[, label]
void write_node_csv(std::ostream& out, const PlanarTree& t, const std::vector<double>* labels);

}  // namespace gwsnake
