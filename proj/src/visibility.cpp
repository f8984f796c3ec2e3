#include "vgecg/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "vgecg/ingest.hpp"

namespace vgecg {

std::size_t BeatGraph::undirected_edge_count() const {
  std::size_t count = 0;
  for (const auto& [u, v] : edges)
    if (u < v || (directed && !has_edge(v, u))) ++count;
  return count;
}

bool BeatGraph::has_edge(std::uint32_t u, std::uint32_t v) const {
  return std::binary_search(edges.begin(), edges.end(), Edge{u, v});
}

namespace {

// For a fixed anchor a, b is visible iff the slope a->b exceeds every slope
// a->c with a < c < b; sweeping b rightwards keeps that maximum incrementally.
template <typename HeightFn>
void sweep_anchor(std::size_t a, std::size_t n, double height_a, std::span<const double> times, HeightFn height,
                  std::vector<Edge>& out, bool both_orientations) {
  double max_slope = -std::numeric_limits<double>::infinity();
  const double ta = times.empty() ? static_cast<double>(a) : times[a];
  for (std::size_t b = a + 1; b < n; ++b) {
    const double tb = times.empty() ? static_cast<double>(b) : times[b];
    const double slope = (height(b) - height_a) / (tb - ta);
    if (slope > max_slope) {
      out.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
      if (both_orientations) out.emplace_back(static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(a));
      max_slope = slope;
    }
  }
}

BeatGraph vg_impl(std::span<const double> values, std::span<const double> times) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("build_vg: need at least two samples");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("build_vg: non-finite sample");
  BeatGraph g;
  g.n = n;
  g.directed = false;
  for (std::size_t a = 0; a + 1 < n; ++a)
    sweep_anchor(a, n, values[a], times, [&](std::size_t b) { return values[b]; }, g.edges, true);
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

}  // namespace

BeatGraph build_vg(std::span<const double> values) { return vg_impl(values, {}); }

BeatGraph build_vg(std::span<const double> values, std::span<const double> times) {
  if (times.size() != values.size()) throw std::invalid_argument("build_vg: times and values differ in length");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("build_vg: times must be strictly increasing");
  return vg_impl(values, times);
}

BeatGraph build_vvg(const Matrix& series, const VvgOptions& options, VvgStats* stats) {
  const std::size_t n = series.rows();
  const std::size_t m = series.cols();
  if (n < 2) throw std::invalid_argument("build_vvg: need at least two time steps");
  if (m < 1) throw std::invalid_argument("build_vvg: need at least one dimension");

  Matrix x = series;
  std::size_t perturbed = 0;
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.row(i);
    double sq = 0.0;
    for (double v : row) {
      if (!std::isfinite(v)) throw std::invalid_argument("build_vvg: non-finite sample at index " + std::to_string(i));
      sq += v * v;
    }
    double norm = std::sqrt(sq);
    if (options.perturb_zero_norm ? norm < 1e-12 : norm == 0.0) {
      if (!options.perturb_zero_norm)
        throw std::invalid_argument("build_vvg: zero-norm vector at index " + std::to_string(i));
      row[0] += 1e-9;
      ++perturbed;
      sq = 0.0;
      for (double v : row) sq += v * v;
      norm = std::sqrt(sq);
    }
    norms[i] = norm;
  }
  if (stats) stats->perturbed = perturbed;

  BeatGraph g;
  g.n = n;
  g.directed = true;
  std::vector<double> proj(n);
  for (std::size_t a = 0; a + 1 < n; ++a) {
    const auto xa = x.row(a);
    // Scalar projection of every later vector onto X_a; the anchor's own height is ||X_a||.
    for (std::size_t c = a + 1; c < n; ++c) {
      const auto xc = x.row(c);
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) dot += xa[i] * xc[i];
      proj[c] = dot / norms[a];
    }
    sweep_anchor(a, n, norms[a], {}, [&](std::size_t b) { return proj[b]; }, g.edges, false);
  }
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

BeatGraph symmetrized(BeatGraph graph) {
  if (!graph.directed) return graph;
  const std::size_t original = graph.edges.size();
  graph.edges.reserve(original * 2);
  for (std::size_t i = 0; i < original; ++i) graph.edges.emplace_back(graph.edges[i].second, graph.edges[i].first);
  std::sort(graph.edges.begin(), graph.edges.end());
  graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end()), graph.edges.end());
  graph.directed = false;
  return graph;
}

std::size_t connected_components(const BeatGraph& g) {
  std::vector<std::size_t> parent(g.n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::size_t components = g.n;
  for (const auto& [u, v] : g.edges) {
    const auto ru = find(u), rv = find(v);
    if (ru != rv) {
      parent[ru] = rv;
      --components;
    }
  }
  return components;
}

nlohmann::json graph_to_json(const BeatGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [u, v] : g.edges) edges.push_back({u, v});
  nlohmann::json j = {{"meta", {{"record_id", g.record_id}, {"r_index", g.r_index}}},
                      {"label", std::string(1, label_char(g.label))},
                      {"n", g.n},
                      {"directed", g.directed},
                      {"edges", std::move(edges)}};
  if (!g.features.empty()) {
    nlohmann::json x = nlohmann::json::array();
    for (std::size_t i = 0; i < g.features.rows(); ++i) {
      const auto r = g.features.row(i);
      x.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["x"] = std::move(x);
  }
  return j;
}

BeatGraph graph_from_json(const nlohmann::json& j) {
  BeatGraph g;
  const auto& meta = j.at("meta");
  g.record_id = meta.at("record_id").get<std::string>();
  g.r_index = meta.at("r_index").get<std::int64_t>();
  const auto label = parse_label(j.at("label").get<std::string>());
  if (!label) throw DataError("graph with unknown label " + j.at("label").dump());
  g.label = *label;
  g.n = j.at("n").get<std::size_t>();
  g.directed = j.at("directed").get<bool>();
  for (const auto& e : j.at("edges")) {
    const auto u = e.at(0).get<std::uint32_t>(), v = e.at(1).get<std::uint32_t>();
    if (u >= g.n || v >= g.n || u == v) throw DataError("graph edge out of range");
    g.edges.emplace_back(u, v);
  }
  std::sort(g.edges.begin(), g.edges.end());
  if (auto it = j.find("x"); it != j.end()) {
    const auto& rows = *it;
    if (rows.size() != g.n) throw DataError("feature rows do not match node count");
    const std::size_t d = g.n ? rows.at(0).size() : 0;
    g.features = Matrix(g.n, d);
    for (std::size_t i = 0; i < g.n; ++i) {
      if (rows[i].size() != d) throw DataError("ragged feature matrix");
      for (std::size_t k = 0; k < d; ++k) g.features(i, k) = rows[i][k].get<double>();
    }
  }
  return g;
}

void write_graphs_jsonl(std::ostream& out, std::span<const BeatGraph> graphs) {
  for (const auto& g : graphs) out << graph_to_json(g).dump() << '\n';
}

std::vector<BeatGraph> read_graphs_jsonl(std::istream& in) {
  std::vector<BeatGraph> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(graph_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("graph JSONL line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vgecg
