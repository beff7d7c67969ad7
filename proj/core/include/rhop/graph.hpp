#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rhop {

struct Edge {
  int u = 0;
  int v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using FeatureVec = std::vector<double>;

/// Graph-level target: integer for classification, real for regression.
using GraphLabel = std::variant<std::int64_t, double>;

/// Directed attributed graph. Undirected inputs are represented with both
/// edge directions present. Self-loops and duplicate directed edges are
/// invalid in input graphs.
struct AttributedGraph {
  int num_nodes = 0;
  std::vector<Edge> edges;
  /// One vector per node (dimension d_v), or empty when d_v = 0.
  std::vector<FeatureVec> node_features;
  /// One vector per edge (dimension d_e), aligned with `edges`, or empty when d_e = 0.
  std::vector<FeatureVec> edge_features;
  std::optional<std::vector<std::int64_t>> node_labels;
  std::optional<GraphLabel> graph_label;

  int node_feature_dim() const {
    return node_features.empty() ? 0 : static_cast<int>(node_features.front().size());
  }
  int edge_feature_dim() const {
    return edge_features.empty() ? 0 : static_cast<int>(edge_features.front().size());
  }
  int num_edges() const { return static_cast<int>(edges.size()); }

  friend bool operator==(const AttributedGraph&, const AttributedGraph&) = default;
};

/// Sentinel for the diameter of a disconnected graph and for unreachable
/// BFS distances.
inline constexpr int kInfiniteDistance = -1;

struct GraphStats {
  double density = 0.0;
  int diameter = 0;  // kInfiniteDistance when disconnected
  std::optional<double> homophily;
  int num_edges = 0;
};

/// Validates all AttributedGraph invariants; throws std::invalid_argument
/// naming the first violated one. `context` is prepended to messages
/// (e.g. "line 3").
void validate_graph(const AttributedGraph& g, const std::string& context = {});

/// Validates a dataset: per-graph invariants plus shared d_v/d_e.
void validate_dataset(const std::vector<AttributedGraph>& graphs);

/// |E| / |V|^2 with directed edge counting.
double density(const AttributedGraph& g);

/// Fraction of edges joining same-label endpoints. Requires node labels and
/// at least one edge.
double homophily(const AttributedGraph& g);

/// Max over node pairs of the unweighted shortest-path length, ignoring edge
/// direction. Returns kInfiniteDistance for disconnected graphs.
int diameter(const AttributedGraph& g);

GraphStats compute_stats(const AttributedGraph& g);

struct HomophilyBucket {
  double score_lo = 0.0;
  double score_hi = 0.0;
  std::vector<std::size_t> graph_indices;
};

/// Sorts graphs by homophily and cuts the order into k contiguous buckets of
/// near-equal size; any remainder goes to the earliest buckets.
std::vector<HomophilyBucket> homophily_buckets(const std::vector<AttributedGraph>& graphs, int k);

}  // namespace rhop
