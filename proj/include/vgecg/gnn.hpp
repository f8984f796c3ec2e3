#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vgecg/matrix.hpp"
#include "vgecg/visibility.hpp"

namespace vgecg {

// ---------------------------------------------------------------------------
// Batching

// B graphs stacked block-diagonally. Neighbour lists hold global node ids of
// in-neighbours (all neighbours for undirected graphs) in CSR form; conv_self /
// conv_nbr are the entries of the normalised propagation matrix used by GraphConv.
struct GraphBatch {
  std::size_t num_graphs = 0;
  std::size_t num_nodes = 0;
  bool directed = false;
  std::vector<std::size_t> graph_offset;  // size num_graphs + 1
  std::vector<std::size_t> graph_id;      // per node
  std::vector<std::size_t> nbr_ptr;       // size num_nodes + 1
  std::vector<std::uint32_t> nbr;
  std::vector<double> conv_self;  // per node
  std::vector<double> conv_nbr;   // aligned with nbr
  Matrix x;
  std::vector<std::size_t> labels;  // class index per graph (N=0, S=1, V=2)

  std::size_t graph_size(std::size_t g) const { return graph_offset[g + 1] - graph_offset[g]; }
};

// Builds a batch from graphs with features attached. Undirected graphs use the
// symmetric D^-1/2 (A+I) D^-1/2 normalisation; directed graphs use in-degree
// row normalisation D_in^-1 (A+I). Graphs labelled F or Q are rejected.
GraphBatch make_batch(std::span<const BeatGraph* const> graphs);
GraphBatch make_batch(std::span<const BeatGraph> graphs);

// ---------------------------------------------------------------------------
// Layer primitives

struct ConvGrads {
  Matrix weight;
  std::vector<double> bias;
  Matrix input;  // dL/dH of the layer input
};

// relu(Â H W + b), Â from the batch normalisation.
Matrix graphconv_forward(const Matrix& h, const GraphBatch& batch, const Matrix& weight,
                         std::span<const double> bias, bool relu = true);
ConvGrads graphconv_backward(const Matrix& h, const GraphBatch& batch, const Matrix& weight,
                             const Matrix& output, const Matrix& grad_output, bool relu = true);

// Neighbourhood used by one SAGE evaluation (CSR over global node ids).
struct Neighbourhood {
  std::vector<std::size_t> ptr;
  std::vector<std::uint32_t> idx;
};

// All in-neighbours when sample_size is 0, otherwise a uniform sample without
// replacement of min(sample_size, degree) neighbours per node.
Neighbourhood sample_neighbourhood(const GraphBatch& batch, std::size_t sample_size, std::mt19937_64* rng);

struct SageOptions {
  bool l2_normalize = false;  // scale each output row to unit length before activation
};

// relu(W^T [h_v ; mean_{u in S(v)} h_u] + b); weight has 2*in rows. Nodes with
// an empty neighbourhood aggregate the zero vector.
Matrix sageconv_forward(const Matrix& h, const Neighbourhood& nbh, const Matrix& weight,
                        std::span<const double> bias, bool relu = true, const SageOptions& options = {});
ConvGrads sageconv_backward(const Matrix& h, const Neighbourhood& nbh, const Matrix& weight,
                            std::span<const double> bias, const Matrix& output, const Matrix& grad_output,
                            bool relu = true, const SageOptions& options = {});

// Row g is the mean over the nodes of graph g. Throws on empty graphs.
Matrix readout_mean(const Matrix& h, const GraphBatch& batch);
Matrix readout_mean_backward(const Matrix& grad_output, const GraphBatch& batch);

Matrix softmax_rows(const Matrix& logits);
// Mean over the batch of -log(p[label]), with log clamped at 1e-12.
double cross_entropy(const Matrix& probs, std::span<const std::size_t> labels);
// Gradient of cross_entropy(softmax(logits)) with respect to the logits.
Matrix softmax_cross_entropy_backward(const Matrix& probs, std::span<const std::size_t> labels);

// ---------------------------------------------------------------------------
// Models

enum class LayerKind { GraphConv, SAGEConv };
enum class Architecture { GCN2, GCN7, GCN60, GCN120, GCN240 };

std::string_view layer_kind_name(LayerKind kind);
std::string_view architecture_name(Architecture arch);
Architecture parse_architecture(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::GraphConv;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
};

// Conv stack of an architecture for input dimension d; readout and softmax follow implicitly.
std::vector<LayerSpec> architecture_layers(Architecture arch, std::size_t d);

struct ConvLayer {
  LayerSpec spec;
  Matrix weight;  // in x out (GraphConv) or 2*in x out (SAGEConv)
  std::vector<double> bias;
};

struct ModelOptions {
  std::size_t sage_sample_size = 0;
  bool sage_l2_normalize = false;
  bool relu_on_last = false;  // activation after the final conv layer
};

// Per-layer values kept from the forward pass for backpropagation.
struct ForwardTrace {
  std::vector<Matrix> inputs;
  std::vector<Matrix> outputs;
  std::vector<Neighbourhood> neighbourhoods;
  Matrix pooled;
  Matrix probs;
};

struct ModelGrads {
  std::vector<Matrix> weight;
  std::vector<std::vector<double>> bias;
};

class GcnModel {
 public:
  GcnModel() = default;
  GcnModel(Architecture arch, std::size_t input_dim, std::vector<ConvLayer> layers, ModelOptions options);

  Architecture architecture() const { return arch_; }
  std::size_t input_dim() const { return input_dim_; }
  const ModelOptions& options() const { return options_; }
  std::vector<ConvLayer>& layers() { return layers_; }
  const std::vector<ConvLayer>& layers() const { return layers_; }

  // Class probabilities (B x 3). The rng drives SAGE neighbour sampling and
  // may be null when sample_size is 0.
  Matrix forward(const GraphBatch& batch, std::mt19937_64* rng = nullptr, ForwardTrace* trace = nullptr) const;
  // Gradients of the mean cross-entropy for a trace produced by forward().
  ModelGrads backward(const GraphBatch& batch, const ForwardTrace& trace) const;
  std::vector<std::size_t> predict(const GraphBatch& batch) const;

  std::size_t parameter_count() const;

 private:
  Architecture arch_ = Architecture::GCN2;
  std::size_t input_dim_ = 0;
  std::vector<ConvLayer> layers_;
  ModelOptions options_;
};

// Glorot-uniform weights drawn from a seeded generator, zero biases.
GcnModel build_architecture(Architecture arch, std::size_t d, std::uint64_t seed = 0, ModelOptions options = {});

nlohmann::json model_to_json(const GcnModel& model);
GcnModel model_from_json(const nlohmann::json& j);

}  // namespace vgecg
