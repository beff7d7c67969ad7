#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rhop/autodiff.hpp"
#include "rhop/encode.hpp"

namespace rhop {

enum class Readout { mean_pool, sum_pool, cls_feature, per_node };
enum class NormPlacement { pre, post };
enum class TaskKind { multiclass, per_node_multiclass, regression };

/// Positional-encoding stream the model consumes. `none` runs on bare
/// rewired graphs (ablation).
enum class PeInput { none, shortest, adjacency, spectral };

PeInput pe_input_from(PeKind kind);
std::string to_string(PeInput pe);
std::string to_string(Readout readout);

struct ModelConfig {
  int hidden_dim = 32;  // d, divisible by heads
  int heads = 4;        // H
  int layers = 4;       // L
  Readout readout = Readout::mean_pool;
  NormPlacement norm = NormPlacement::pre;
  std::uint64_t seed = 0;

  // Data-dependent shape info.
  int node_feature_dim = 0;
  int edge_feature_dim = 0;
  PeInput pe = PeInput::none;
  /// Lookup bound r for shortest-path values, vector length r for adjacency
  /// powers, q for spectral coordinates.
  int pe_length = 1;
  int outputs = 1;
  TaskKind task = TaskKind::multiclass;
};

/// Per-layer weights of the graph Transformer: per-head attention projections
/// (query A_k, key B_k, value W_k, edge-logit scalar C_k, edge-value U_k),
/// feature normalizations with learned affine, and the node/edge feed-forward
/// blocks. The edge-value projection mixes edge states into the aggregated
/// messages (a_ij (W_k h_j + U_k e_ij)); without it, softmax-normalized
/// attention cannot move edge information into node states when node
/// features are constant across the graph.
struct LayerWeights {
  std::vector<Matrix> attn_query;       // H matrices, d x d/H
  std::vector<Matrix> attn_key;         // H matrices, d x d/H
  std::vector<Matrix> attn_value;       // H matrices, d x d/H
  std::vector<Matrix> attn_edge;        // H matrices, d x 1
  std::vector<Matrix> attn_edge_value;  // H matrices, d x d/H
  Matrix norm1_gamma, norm1_beta;
  Matrix norm2_gamma, norm2_beta;
  Matrix ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Matrix edge_norm_gamma, edge_norm_beta;
  Matrix edge_ffn_w1, edge_ffn_b1, edge_ffn_w2, edge_ffn_b2;
};

/// Full parameter set. All positional-encoding embedders exist regardless of
/// the configured PE kind; the unused ones simply stay off the computation
/// path (and get zero gradients).
struct ToyModel {
  ModelConfig config;
  Matrix node_embed_w, node_embed_b;    // d_v x d, 1 x d
  Matrix edge_embed_w, edge_embed_b;    // d_e x d, 1 x d
  Matrix shortest_table;                // (pe_length + 1) x d lookup
  Matrix adjacency_embed_w;             // pe_length x d linear map of raw counts
  Matrix spectral_embed_w;              // pe_length x d
  Matrix self_edge_embed;               // 1 x d state for self-attention slots
  Matrix readout_w1, readout_b1, readout_w2, readout_b2;
  std::vector<LayerWeights> layers;

  std::vector<std::pair<std::string, Matrix*>> named_params();
  std::vector<std::pair<std::string, const Matrix*>> named_params() const;
};

ToyModel make_model(const ModelConfig& config);

struct ForwardResult {
  Matrix node_states;  // n x d after the last layer
  Matrix readout;      // 1 x outputs, or n x outputs for per_node
};

/// Runs the layer stack on an encoded graph. Attention normalizes over
/// N_i and the node itself; with per-node readout and a graph-level
/// classification task, callers read the logits of node 0 (the query/root
/// node by generator convention). Throws numeric_error naming the layer on
/// non-finite activations and std::invalid_argument on PE kind mismatch.
ForwardResult forward(const ToyModel& model, const EncodedGraph& g);

struct Target {
  std::optional<std::int64_t> class_id;
  std::optional<double> value;
  std::optional<std::vector<std::int64_t>> node_classes;
};

Target target_from_graph(const AttributedGraph& g, TaskKind task);

/// Cross-entropy for classification tasks, mean absolute error for
/// regression. For multiclass with a multi-row readout, row 0 is scored.
double loss_value(const Matrix& readout, const Target& target, TaskKind task);

/// Classification accuracy of a readout (1.0/0.0 for single targets, mean
/// over nodes for per-node tasks).
double accuracy_value(const Matrix& readout, const Target& target, TaskKind task);

struct Gradients {
  std::vector<Matrix> by_param;  // aligned with named_params() order
  double loss = 0.0;
  Matrix readout;
};

/// Forward + loss + reverse sweep; gradients for every parameter (zero for
/// parameters off the computation path).
Gradients backward(const ToyModel& model, const EncodedGraph& g, const Target& target);

}  // namespace rhop
