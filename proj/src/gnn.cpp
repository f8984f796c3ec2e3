#include "vgecg/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "vgecg/ingest.hpp"

namespace vgecg {

GraphBatch make_batch(std::span<const BeatGraph* const> graphs) {
  if (graphs.empty()) throw std::invalid_argument("make_batch: no graphs");
  GraphBatch b;
  b.num_graphs = graphs.size();
  b.directed = graphs.front()->directed;
  const std::size_t d = graphs.front()->features.cols();
  b.graph_offset.push_back(0);
  for (const auto* g : graphs) {
    if (g->n == 0) throw std::invalid_argument("make_batch: empty graph");
    if (g->directed != b.directed) throw std::invalid_argument("make_batch: mixed directed and undirected graphs");
    if (g->features.rows() != g->n || g->features.cols() != d || d == 0)
      throw std::invalid_argument("make_batch: graph features missing or inconsistent");
    const auto cls = class_index(g->label);
    if (!cls) throw std::invalid_argument("make_batch: graph label outside {N, S, V}");
    b.labels.push_back(*cls);
    b.graph_offset.push_back(b.graph_offset.back() + g->n);
  }
  b.num_nodes = b.graph_offset.back();
  b.graph_id.resize(b.num_nodes);
  b.x = Matrix(b.num_nodes, d);

  // In-neighbour counts; edges are (u -> v), undirected graphs list both orientations.
  std::vector<std::size_t> in_deg(b.num_nodes, 0);
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto off = b.graph_offset[gi];
    for (const auto& [u, v] : graphs[gi]->edges) ++in_deg[off + v];
  }
  b.nbr_ptr.assign(b.num_nodes + 1, 0);
  for (std::size_t i = 0; i < b.num_nodes; ++i) b.nbr_ptr[i + 1] = b.nbr_ptr[i] + in_deg[i];
  b.nbr.resize(b.nbr_ptr.back());
  std::vector<std::size_t> fill(b.nbr_ptr.begin(), b.nbr_ptr.end() - 1);
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto* g = graphs[gi];
    const auto off = b.graph_offset[gi];
    for (std::size_t i = 0; i < g->n; ++i) {
      b.graph_id[off + i] = gi;
      std::copy(g->features.row(i).begin(), g->features.row(i).end(), b.x.row(off + i).begin());
    }
    for (const auto& [u, v] : g->edges) b.nbr[fill[off + v]++] = static_cast<std::uint32_t>(off + u);
  }

  // Self-loop degrees: d~ = deg + 1.
  b.conv_self.resize(b.num_nodes);
  b.conv_nbr.resize(b.nbr.size());
  for (std::size_t v = 0; v < b.num_nodes; ++v) {
    const double dv = static_cast<double>(in_deg[v]) + 1.0;
    b.conv_self[v] = 1.0 / dv;
    for (std::size_t k = b.nbr_ptr[v]; k < b.nbr_ptr[v + 1]; ++k) {
      if (b.directed) {
        b.conv_nbr[k] = 1.0 / dv;
      } else {
        const double du = static_cast<double>(in_deg[b.nbr[k]]) + 1.0;
        b.conv_nbr[k] = 1.0 / std::sqrt(dv * du);
      }
    }
  }
  return b;
}

GraphBatch make_batch(std::span<const BeatGraph> graphs) {
  std::vector<const BeatGraph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const auto& g : graphs) ptrs.push_back(&g);
  return make_batch(std::span<const BeatGraph* const>(ptrs));
}

namespace {

// Â H
Matrix propagate(const Matrix& h, const GraphBatch& b) {
  Matrix out(h.rows(), h.cols());
  const std::size_t c = h.cols();
  for (std::size_t v = 0; v < b.num_nodes; ++v) {
    double* dst = out.row(v).data();
    const double* self = h.row(v).data();
    const double ws = b.conv_self[v];
    for (std::size_t j = 0; j < c; ++j) dst[j] = ws * self[j];
    for (std::size_t k = b.nbr_ptr[v]; k < b.nbr_ptr[v + 1]; ++k) {
      const double w = b.conv_nbr[k];
      const double* src = h.row(b.nbr[k]).data();
      for (std::size_t j = 0; j < c; ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

// Â^T G
Matrix propagate_transpose(const Matrix& g, const GraphBatch& b) {
  Matrix out(g.rows(), g.cols());
  const std::size_t c = g.cols();
  for (std::size_t v = 0; v < b.num_nodes; ++v) {
    const double* src = g.row(v).data();
    double* self = out.row(v).data();
    const double ws = b.conv_self[v];
    for (std::size_t j = 0; j < c; ++j) self[j] += ws * src[j];
    for (std::size_t k = b.nbr_ptr[v]; k < b.nbr_ptr[v + 1]; ++k) {
      const double w = b.conv_nbr[k];
      double* dst = out.row(b.nbr[k]).data();
      for (std::size_t j = 0; j < c; ++j) dst[j] += w * src[j];
    }
  }
  return out;
}

void relu_inplace(Matrix& m) {
  for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
}

// grad * relu'(z), with the mask read from the activated output.
Matrix relu_mask(const Matrix& output, const Matrix& grad) {
  Matrix out = grad;
  const auto& o = output.values();
  auto& g = out.values();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(o[i] > 0.0)) g[i] = 0.0;
  return out;
}

void check_shapes(const Matrix& h, const Matrix& weight, std::span<const double> bias, std::size_t rows_per_in,
                  const char* op) {
  if (weight.rows() != rows_per_in * h.cols() || bias.size() != weight.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

// [h_v ; mean of neighbours]
Matrix sage_concat(const Matrix& h, const Neighbourhood& nbh) {
  const std::size_t n = h.rows(), c = h.cols();
  if (nbh.ptr.size() != n + 1) throw std::invalid_argument("sageconv: neighbourhood does not match input");
  Matrix cat(n, 2 * c);
  for (std::size_t v = 0; v < n; ++v) {
    auto dst = cat.row(v);
    const auto self = h.row(v);
    std::copy(self.begin(), self.end(), dst.begin());
    const std::size_t deg = nbh.ptr[v + 1] - nbh.ptr[v];
    if (deg == 0) continue;
    double* agg = dst.data() + c;
    for (std::size_t k = nbh.ptr[v]; k < nbh.ptr[v + 1]; ++k) {
      const double* src = h.row(nbh.idx[k]).data();
      for (std::size_t j = 0; j < c; ++j) agg[j] += src[j];
    }
    const double inv = 1.0 / static_cast<double>(deg);
    for (std::size_t j = 0; j < c; ++j) agg[j] *= inv;
  }
  return cat;
}

constexpr double kNormFloor = 1e-12;

}  // namespace

Matrix graphconv_forward(const Matrix& h, const GraphBatch& batch, const Matrix& weight,
                         std::span<const double> bias, bool relu) {
  check_shapes(h, weight, bias, 1, "graphconv_forward");
  if (h.rows() != batch.num_nodes) throw std::invalid_argument("graphconv_forward: node count mismatch");
  // Propagate on the narrower side.
  Matrix out = weight.cols() < weight.rows() ? propagate(matmul(h, weight), batch) : matmul(propagate(h, batch), weight);
  add_row_vector(out, bias);
  if (relu) relu_inplace(out);
  return out;
}

ConvGrads graphconv_backward(const Matrix& h, const GraphBatch& batch, const Matrix& weight, const Matrix& output,
                             const Matrix& grad_output, bool relu) {
  const Matrix dz = relu ? relu_mask(output, grad_output) : grad_output;
  ConvGrads g;
  g.bias = column_sums(dz);
  // Z = Â H W: dW = (ÂH)^T dZ = H^T (Â^T dZ); dH = Â^T dZ W^T
  const Matrix back = propagate_transpose(dz, batch);
  g.weight = matmul_tn(h, back);
  g.input = matmul_nt(back, weight);
  return g;
}

Neighbourhood sample_neighbourhood(const GraphBatch& batch, std::size_t sample_size, std::mt19937_64* rng) {
  Neighbourhood nbh;
  if (sample_size == 0) {
    nbh.ptr = batch.nbr_ptr;
    nbh.idx = batch.nbr;
    return nbh;
  }
  if (!rng) throw std::invalid_argument("sample_neighbourhood: sampling requires a generator");
  nbh.ptr.reserve(batch.num_nodes + 1);
  nbh.ptr.push_back(0);
  std::vector<std::uint32_t> pool;
  for (std::size_t v = 0; v < batch.num_nodes; ++v) {
    pool.assign(batch.nbr.begin() + static_cast<std::ptrdiff_t>(batch.nbr_ptr[v]),
                batch.nbr.begin() + static_cast<std::ptrdiff_t>(batch.nbr_ptr[v + 1]));
    const std::size_t take = std::min(sample_size, pool.size());
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < take; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(*rng)]);
    }
    nbh.idx.insert(nbh.idx.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
    nbh.ptr.push_back(nbh.idx.size());
  }
  return nbh;
}

Matrix sageconv_forward(const Matrix& h, const Neighbourhood& nbh, const Matrix& weight, std::span<const double> bias,
                        bool relu, const SageOptions& options) {
  check_shapes(h, weight, bias, 2, "sageconv_forward");
  Matrix out = matmul(sage_concat(h, nbh), weight);
  add_row_vector(out, bias);
  if (options.l2_normalize) {
    for (std::size_t i = 0; i < out.rows(); ++i) {
      auto r = out.row(i);
      double sq = 0.0;
      for (double v : r) sq += v * v;
      const double norm = std::max(std::sqrt(sq), kNormFloor);
      for (double& v : r) v /= norm;
    }
  }
  if (relu) relu_inplace(out);
  return out;
}

ConvGrads sageconv_backward(const Matrix& h, const Neighbourhood& nbh, const Matrix& weight,
                            std::span<const double> bias, const Matrix& output, const Matrix& grad_output, bool relu,
                            const SageOptions& options) {
  check_shapes(h, weight, bias, 2, "sageconv_backward");
  const Matrix cat = sage_concat(h, nbh);
  Matrix dz = relu ? relu_mask(output, grad_output) : grad_output;
  if (options.l2_normalize) {
    // y = z / |z|  =>  dz = (dy - y (y . dy)) / |z|
    Matrix z = matmul(cat, weight);
    add_row_vector(z, bias);
    for (std::size_t i = 0; i < z.rows(); ++i) {
      auto zr = z.row(i);
      auto dr = dz.row(i);
      double sq = 0.0;
      for (double v : zr) sq += v * v;
      const double raw = std::sqrt(sq);
      if (raw < kNormFloor) {
        for (double& v : dr) v /= kNormFloor;
        continue;
      }
      double dot = 0.0;
      for (std::size_t j = 0; j < zr.size(); ++j) dot += (zr[j] / raw) * dr[j];
      for (std::size_t j = 0; j < zr.size(); ++j) dr[j] = (dr[j] - (zr[j] / raw) * dot) / raw;
    }
  }
  ConvGrads g;
  g.bias = column_sums(dz);
  g.weight = matmul_tn(cat, dz);
  const Matrix dcat = matmul_nt(dz, weight);
  const std::size_t c = h.cols();
  g.input = Matrix(h.rows(), c);
  for (std::size_t v = 0; v < h.rows(); ++v) {
    const auto src = dcat.row(v);
    auto self = g.input.row(v);
    for (std::size_t j = 0; j < c; ++j) self[j] += src[j];
    const std::size_t deg = nbh.ptr[v + 1] - nbh.ptr[v];
    if (deg == 0) continue;
    const double inv = 1.0 / static_cast<double>(deg);
    for (std::size_t k = nbh.ptr[v]; k < nbh.ptr[v + 1]; ++k) {
      double* dst = g.input.row(nbh.idx[k]).data();
      for (std::size_t j = 0; j < c; ++j) dst[j] += inv * src[c + j];
    }
  }
  return g;
}

Matrix readout_mean(const Matrix& h, const GraphBatch& batch) {
  if (h.rows() != batch.num_nodes) throw std::invalid_argument("readout_mean: node count mismatch");
  Matrix out(batch.num_graphs, h.cols());
  for (std::size_t g = 0; g < batch.num_graphs; ++g) {
    const std::size_t size = batch.graph_size(g);
    if (size == 0) throw std::invalid_argument("readout_mean: empty graph");
    auto dst = out.row(g);
    for (std::size_t v = batch.graph_offset[g]; v < batch.graph_offset[g + 1]; ++v) {
      const auto src = h.row(v);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
    for (double& x : dst) x /= static_cast<double>(size);
  }
  return out;
}

Matrix readout_mean_backward(const Matrix& grad_output, const GraphBatch& batch) {
  Matrix out(batch.num_nodes, grad_output.cols());
  for (std::size_t g = 0; g < batch.num_graphs; ++g) {
    const double inv = 1.0 / static_cast<double>(batch.graph_size(g));
    const auto src = grad_output.row(g);
    for (std::size_t v = batch.graph_offset[g]; v < batch.graph_offset[g + 1]; ++v) {
      auto dst = out.row(v);
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] = src[j] * inv;
    }
  }
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto r = logits.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double sum = 0.0;
    auto o = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) sum += (o[j] = std::exp(r[j] - mx));
    for (double& v : o) v /= sum;
  }
  return out;
}

double cross_entropy(const Matrix& probs, std::span<const std::size_t> labels) {
  if (probs.rows() != labels.size() || labels.empty()) throw std::invalid_argument("cross_entropy: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= probs.cols()) throw std::invalid_argument("cross_entropy: label out of range");
    total -= std::log(std::max(probs(i, labels[i]), 1e-12));
  }
  return total / static_cast<double>(labels.size());
}

Matrix softmax_cross_entropy_backward(const Matrix& probs, std::span<const std::size_t> labels) {
  Matrix grad = probs;
  const double inv = 1.0 / static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    grad(i, labels[i]) -= 1.0;
    for (double& v : grad.row(i)) v *= inv;
  }
  return grad;
}

// ---------------------------------------------------------------------------

std::string_view layer_kind_name(LayerKind kind) {
  return kind == LayerKind::GraphConv ? "GraphConv" : "SAGEConv";
}

std::string_view architecture_name(Architecture arch) {
  switch (arch) {
    case Architecture::GCN2: return "GCN2";
    case Architecture::GCN7: return "GCN7";
    case Architecture::GCN60: return "GCN60";
    case Architecture::GCN120: return "GCN120";
    case Architecture::GCN240: return "GCN240";
  }
  return "?";
}

Architecture parse_architecture(std::string_view name) {
  for (auto a : {Architecture::GCN2, Architecture::GCN7, Architecture::GCN60, Architecture::GCN120,
                 Architecture::GCN240})
    if (architecture_name(a) == name) return a;
  throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

std::vector<LayerSpec> architecture_layers(Architecture arch, std::size_t d) {
  if (d == 0) throw std::invalid_argument("architecture_layers: input dimension must be positive");
  using K = LayerKind;
  auto chain = [d](std::initializer_list<std::pair<K, std::size_t>> layers) {
    std::vector<LayerSpec> out;
    std::size_t in = d;
    for (const auto& [kind, width] : layers) {
      out.push_back({kind, in, width});
      in = width;
    }
    return out;
  };
  switch (arch) {
    case Architecture::GCN2:
      return chain({{K::GraphConv, 20}, {K::GraphConv, 3}});
    case Architecture::GCN7:
      // First layer widened to 50 so that it chains into the 50x40 GraphConv.
      return chain({{K::SAGEConv, 50},
                    {K::GraphConv, 40},
                    {K::SAGEConv, 30},
                    {K::SAGEConv, 20},
                    {K::SAGEConv, 10},
                    {K::GraphConv, 5},
                    {K::GraphConv, 3}});
    case Architecture::GCN60:
      return chain({{K::SAGEConv, 60}, {K::SAGEConv, 50}, {K::SAGEConv, 35}, {K::SAGEConv, 3}});
    case Architecture::GCN120:
      return chain({{K::SAGEConv, 120}, {K::SAGEConv, 40}, {K::SAGEConv, 20}, {K::SAGEConv, 3}});
    case Architecture::GCN240:
      return chain({{K::SAGEConv, 240}, {K::SAGEConv, 140}, {K::SAGEConv, 40}, {K::SAGEConv, 3}});
  }
  throw std::invalid_argument("unknown architecture");
}

GcnModel::GcnModel(Architecture arch, std::size_t input_dim, std::vector<ConvLayer> layers, ModelOptions options)
    : arch_(arch), input_dim_(input_dim), layers_(std::move(layers)), options_(options) {
  if (layers_.empty()) throw std::invalid_argument("GcnModel: no layers");
  std::size_t in = input_dim_;
  for (const auto& l : layers_) {
    const std::size_t rows = l.spec.kind == LayerKind::SAGEConv ? 2 * l.spec.in_dim : l.spec.in_dim;
    if (l.spec.in_dim != in || l.weight.rows() != rows || l.weight.cols() != l.spec.out_dim ||
        l.bias.size() != l.spec.out_dim)
      throw std::invalid_argument("GcnModel: layer dimensions do not chain");
    in = l.spec.out_dim;
  }
  if (in != kNumClasses) throw std::invalid_argument("GcnModel: final layer must have 3 outputs");
}

Matrix GcnModel::forward(const GraphBatch& batch, std::mt19937_64* rng, ForwardTrace* trace) const {
  if (batch.x.cols() != input_dim_) throw std::invalid_argument("GcnModel::forward: feature dimension mismatch");
  const SageOptions sage{options_.sage_l2_normalize};
  Matrix h = batch.x;
  if (trace) *trace = ForwardTrace{};
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const bool relu = l + 1 < layers_.size() || options_.relu_on_last;
    Matrix out;
    Neighbourhood nbh;
    if (layer.spec.kind == LayerKind::GraphConv) {
      out = graphconv_forward(h, batch, layer.weight, layer.bias, relu);
    } else {
      nbh = sample_neighbourhood(batch, options_.sage_sample_size, rng);
      out = sageconv_forward(h, nbh, layer.weight, layer.bias, relu, sage);
    }
    if (trace) {
      trace->inputs.push_back(std::move(h));
      trace->outputs.push_back(out);
      trace->neighbourhoods.push_back(std::move(nbh));
    }
    h = std::move(out);
  }
  Matrix pooled = readout_mean(h, batch);
  Matrix probs = softmax_rows(pooled);
  if (trace) {
    trace->pooled = std::move(pooled);
    trace->probs = probs;
  }
  return probs;
}

ModelGrads GcnModel::backward(const GraphBatch& batch, const ForwardTrace& trace) const {
  const SageOptions sage{options_.sage_l2_normalize};
  ModelGrads grads;
  grads.weight.resize(layers_.size());
  grads.bias.resize(layers_.size());
  Matrix g = readout_mean_backward(softmax_cross_entropy_backward(trace.probs, batch.labels), batch);
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    const bool relu = l + 1 < layers_.size() || options_.relu_on_last;
    ConvGrads cg = layer.spec.kind == LayerKind::GraphConv
                       ? graphconv_backward(trace.inputs[l], batch, layer.weight, trace.outputs[l], g, relu)
                       : sageconv_backward(trace.inputs[l], trace.neighbourhoods[l], layer.weight, layer.bias,
                                           trace.outputs[l], g, relu, sage);
    grads.weight[l] = std::move(cg.weight);
    grads.bias[l] = std::move(cg.bias);
    g = std::move(cg.input);
  }
  return grads;
}

std::vector<std::size_t> GcnModel::predict(const GraphBatch& batch) const {
  // Inference aggregates all neighbours.
  GcnModel full = *this;
  full.options_.sage_sample_size = 0;
  const Matrix probs = full.forward(batch);
  std::vector<std::size_t> out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const auto r = probs.row(i);
    out[i] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

std::size_t GcnModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

GcnModel build_architecture(Architecture arch, std::size_t d, std::uint64_t seed, ModelOptions options) {
  std::mt19937_64 rng(seed);
  std::vector<ConvLayer> layers;
  for (const auto& spec : architecture_layers(arch, d)) {
    ConvLayer layer;
    layer.spec = spec;
    const std::size_t fan_in = spec.kind == LayerKind::SAGEConv ? 2 * spec.in_dim : spec.in_dim;
    layer.weight = Matrix(fan_in, spec.out_dim);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + spec.out_dim));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : layer.weight.values()) w = dist(rng);
    layer.bias.assign(spec.out_dim, 0.0);
    layers.push_back(std::move(layer));
  }
  return GcnModel(arch, d, std::move(layers), options);
}

nlohmann::json model_to_json(const GcnModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers()) {
    layers.push_back({{"kind", std::string(layer_kind_name(l.spec.kind))},
                      {"in_dim", l.spec.in_dim},
                      {"out_dim", l.spec.out_dim},
                      {"weight_rows", l.weight.rows()},
                      {"weight_cols", l.weight.cols()},
                      {"weight", l.weight.values()},
                      {"bias", l.bias}});
  }
  const auto& o = model.options();
  return {{"format_version", 1},
          {"name", std::string(architecture_name(model.architecture()))},
          {"d", model.input_dim()},
          {"options",
           {{"sage_sample_size", o.sage_sample_size},
            {"sage_l2_normalize", o.sage_l2_normalize},
            {"relu_on_last", o.relu_on_last}}},
          {"layers", std::move(layers)}};
}

GcnModel model_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != 1) throw DataError("unsupported checkpoint version");
  const auto arch = parse_architecture(j.at("name").get<std::string>());
  const auto d = j.at("d").get<std::size_t>();
  ModelOptions o;
  const auto& jo = j.at("options");
  o.sage_sample_size = jo.at("sage_sample_size").get<std::size_t>();
  o.sage_l2_normalize = jo.at("sage_l2_normalize").get<bool>();
  o.relu_on_last = jo.at("relu_on_last").get<bool>();
  std::vector<ConvLayer> layers;
  for (const auto& jl : j.at("layers")) {
    ConvLayer l;
    const auto kind = jl.at("kind").get<std::string>();
    if (kind == "GraphConv") l.spec.kind = LayerKind::GraphConv;
    else if (kind == "SAGEConv") l.spec.kind = LayerKind::SAGEConv;
    else throw DataError("unknown layer kind " + kind);
    l.spec.in_dim = jl.at("in_dim").get<std::size_t>();
    l.spec.out_dim = jl.at("out_dim").get<std::size_t>();
    l.weight = Matrix(jl.at("weight_rows").get<std::size_t>(), jl.at("weight_cols").get<std::size_t>());
    const auto w = jl.at("weight").get<std::vector<double>>();
    if (w.size() != l.weight.size()) throw DataError("checkpoint weight size mismatch");
    l.weight.values() = w;
    l.bias = jl.at("bias").get<std::vector<double>>();
    layers.push_back(std::move(l));
  }
  return GcnModel(arch, d, std::move(layers), o);
}

}  // namespace vgecg
