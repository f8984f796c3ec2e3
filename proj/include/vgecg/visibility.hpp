#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vgecg/labels.hpp"
#include "vgecg/matrix.hpp"

namespace vgecg {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// Graph of one beat. Undirected graphs store both orientations of every edge;
// edges are kept sorted lexicographically. Self-loops are never stored.
struct BeatGraph {
  std::size_t n = 0;
  std::vector<Edge> edges;
  bool directed = false;
  AamiLabel label = AamiLabel::N;
  Matrix features;  // n x d, filled by compute_features
  std::string record_id;
  std::int64_t r_index = 0;

  std::size_t undirected_edge_count() const;
  bool has_edge(std::uint32_t u, std::uint32_t v) const;
};

// Natural visibility graph with t_i = i. Throws std::invalid_argument when n < 2.
BeatGraph build_vg(std::span<const double> values);
// Same criterion on explicit, strictly increasing sample times.
BeatGraph build_vg(std::span<const double> values, std::span<const double> times);

struct VvgOptions {
  // Replace vectors with norm < 1e-12 by adding 1e-9 to their first component
  // instead of failing.
  bool perturb_zero_norm = false;
};

struct VvgStats {
  std::size_t perturbed = 0;
};

// Vector visibility graph over the rows of `series` (n time steps x m
// dimensions). Edges point forward in time. Throws std::invalid_argument when
// n < 2, m < 1, or a row has zero norm (unless perturbation is enabled).
BeatGraph build_vvg(const Matrix& series, const VvgOptions& options = {}, VvgStats* stats = nullptr);

// Adds the reverse of every edge and marks the graph undirected.
BeatGraph symmetrized(BeatGraph graph);

// Number of connected components, ignoring edge direction.
std::size_t connected_components(const BeatGraph& g);

nlohmann::json graph_to_json(const BeatGraph& g);
BeatGraph graph_from_json(const nlohmann::json& j);
void write_graphs_jsonl(std::ostream& out, std::span<const BeatGraph> graphs);
std::vector<BeatGraph> read_graphs_jsonl(std::istream& in);

}  // namespace vgecg
