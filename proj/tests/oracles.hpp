#pragma once

// Slow, direct reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <span>
#include <vector>

#include "vgecg/gnn.hpp"
#include "vgecg/matrix.hpp"
#include "vgecg/visibility.hpp"

namespace oracle {

using EdgeSet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

inline EdgeSet edge_set(const vgecg::BeatGraph& g) { return {g.edges.begin(), g.edges.end()}; }

// Every (a, b, c) triple of the natural visibility criterion; both orientations stored.
inline EdgeSet vg(std::span<const double> y, std::span<const double> t = {}) {
  const std::size_t n = y.size();
  auto time = [&](std::size_t i) { return t.empty() ? static_cast<double>(i) : t[i]; };
  EdgeSet out;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      bool visible = true;
      for (std::size_t c = a + 1; c < b && visible; ++c)
        visible = y[c] < y[b] + (y[a] - y[b]) * (time(b) - time(c)) / (time(b) - time(a));
      if (visible) {
        out.insert({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
        out.insert({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(a)});
      }
    }
  return out;
}

// Directed a -> b edges of the vector criterion on projections onto X_a.
inline EdgeSet vvg(const vgecg::Matrix& x) {
  const std::size_t n = x.rows(), m = x.cols();
  auto dot = [&](std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < m; ++k) s += x(i, k) * x(j, k);
    return s;
  };
  EdgeSet out;
  for (std::size_t a = 0; a < n; ++a) {
    const double norm = std::sqrt(dot(a, a));
    auto proj = [&](std::size_t j) { return dot(a, j) / norm; };
    for (std::size_t b = a + 1; b < n; ++b) {
      bool visible = true;
      for (std::size_t c = a + 1; c < b && visible; ++c)
        visible = proj(c) < proj(b) + (proj(a) - proj(b)) * static_cast<double>(b - c) / static_cast<double>(b - a);
      if (visible) out.insert({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
    }
  }
  return out;
}

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const vgecg::Matrix& m) {
  Dense d(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  return d;
}

// Adjacency of a batch of graphs, stacked block-diagonally; a(i, j) = 1 for an edge i -> j.
inline Dense batch_adjacency(std::span<const vgecg::BeatGraph> graphs) {
  std::size_t total = 0;
  for (const auto& g : graphs) total += g.n;
  Dense a(total, std::vector<double>(total, 0.0));
  std::size_t off = 0;
  for (const auto& g : graphs) {
    for (auto [u, v] : g.edges) a[off + u][off + v] = 1.0;
    off += g.n;
  }
  return a;
}

inline double relu(double v) { return v > 0 ? v : 0.0; }

// relu?(D~^-1/2 (A + I) D~^-1/2 H W + b) for undirected graphs, D~_in^-1 (A + I) H W + b for directed.
inline Dense graphconv(const Dense& adj, bool directed, const Dense& h, const Dense& w, const std::vector<double>& b,
                       bool act) {
  const std::size_t n = adj.size();
  Dense at = adj;
  for (std::size_t i = 0; i < n; ++i) at[i][i] += 1.0;
  Dense norm(n, std::vector<double>(n, 0.0));
  if (!directed) {
    std::vector<double> deg(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) deg[i] += at[i][j];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) norm[i][j] = at[i][j] / std::sqrt(deg[i] * deg[j]);
  } else {
    // Row v aggregates its in-neighbours u (edges u -> v).
    for (std::size_t v = 0; v < n; ++v) {
      double deg = 0;
      for (std::size_t u = 0; u < n; ++u) deg += at[u][v];
      for (std::size_t u = 0; u < n; ++u) norm[v][u] = at[u][v] / deg;
    }
  }
  const std::size_t in = w.size(), out = w[0].size();
  Dense res(n, std::vector<double>(out, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < in; ++k) s += norm[i][j] * h[j][k] * w[k][o];
      res[i][o] = act ? relu(s) : s;
    }
  return res;
}

// relu?([h_v ; mean of in-neighbours] W + b), zero vector for empty neighbourhoods.
inline Dense sageconv(const Dense& adj, const Dense& h, const Dense& w, const std::vector<double>& b, bool act) {
  const std::size_t n = adj.size(), in = h.empty() ? 0 : h[0].size(), out = w[0].size();
  Dense res(n, std::vector<double>(out, 0.0));
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<double> cat(2 * in, 0.0);
    for (std::size_t k = 0; k < in; ++k) cat[k] = h[v][k];
    double cnt = 0;
    for (std::size_t u = 0; u < n; ++u)
      if (adj[u][v] != 0.0) {
        cnt += 1;
        for (std::size_t k = 0; k < in; ++k) cat[in + k] += h[u][k];
      }
    if (cnt > 0)
      for (std::size_t k = 0; k < in; ++k) cat[in + k] /= cnt;
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      for (std::size_t k = 0; k < 2 * in; ++k) s += cat[k] * w[k][o];
      res[v][o] = act ? relu(s) : s;
    }
  }
  return res;
}

inline Dense readout(const Dense& h, const std::vector<std::size_t>& sizes) {
  Dense out;
  std::size_t off = 0;
  for (std::size_t sz : sizes) {
    std::vector<double> row(h[0].size(), 0.0);
    for (std::size_t i = off; i < off + sz; ++i)
      for (std::size_t k = 0; k < row.size(); ++k) row[k] += h[i][k];
    for (auto& v : row) v /= static_cast<double>(sz);
    out.push_back(row);
    off += sz;
  }
  return out;
}

inline double softmax_ce(const Dense& logits, const std::vector<std::size_t>& labels) {
  double loss = 0;
  for (std::size_t g = 0; g < logits.size(); ++g) {
    double mx = logits[g][0];
    for (double v : logits[g]) mx = std::max(mx, v);
    double z = 0;
    for (double v : logits[g]) z += std::exp(v - mx);
    const double p = std::exp(logits[g][labels[g]] - mx) / z;
    loss -= std::log(std::max(p, 1e-12));
  }
  return loss / static_cast<double>(logits.size());
}

// Central difference of f with respect to every entry of `values`.
inline std::vector<double> numeric_gradient(std::vector<double>& values, const std::function<double()>& f,
                                            double h = 1e-5) {
  std::vector<double> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double keep = values[i];
    values[i] = keep + h;
    const double up = f();
    values[i] = keep - h;
    const double down = f();
    values[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// max |a - n| / max(|a|, |n|, floor) over entries.
inline double max_relative_error(std::span<const double> analytic, std::span<const double> numeric,
                                 double floor = 1e-6) {
  double worst = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

inline vgecg::Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> d(lo, hi);
  vgecg::Matrix m(r, c);
  for (auto& v : m.values()) v = d(rng);
  return m;
}

// Undirected graph on n nodes: a random spanning tree plus extra random edges.
inline vgecg::BeatGraph random_graph(std::size_t n, std::size_t d, std::mt19937_64& rng, vgecg::AamiLabel label,
                                     double extra_p = 0.3) {
  vgecg::BeatGraph g;
  g.n = n;
  g.label = label;
  std::set<std::pair<std::uint32_t, std::uint32_t>> e;
  std::uniform_real_distribution<double> u(0, 1);
  for (std::uint32_t v = 1; v < n; ++v) {
    const auto p = static_cast<std::uint32_t>(std::uniform_int_distribution<std::uint32_t>(0, v - 1)(rng));
    e.insert({p, v});
    e.insert({v, p});
  }
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = a + 1; b < n; ++b)
      if (u(rng) < extra_p) {
        e.insert({a, b});
        e.insert({b, a});
      }
  g.edges.assign(e.begin(), e.end());
  g.features = random_matrix(n, d, rng);
  return g;
}

}  // namespace oracle
