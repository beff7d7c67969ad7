#include "rhop/generate.hpp"

#include <algorithm>
#include <stdexcept>

#include "rhop/errors.hpp"
#include "rhop/rng.hpp"

namespace rhop {

namespace {

void check_probability(double p, const char* name) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

/// Bernoulli edges over unordered pairs in (i, j) lexicographic order, both
/// directions appended together.
void sample_pair_edges(AttributedGraph& g, SplitMix64& rng,
                       const std::function<double(int, int)>& pair_probability) {
  for (int i = 0; i < g.num_nodes; ++i) {
    for (int j = i + 1; j < g.num_nodes; ++j) {
      if (rng.bernoulli(pair_probability(i, j))) {
        g.edges.push_back(Edge{i, j});
        g.edges.push_back(Edge{j, i});
      }
    }
  }
}

}  // namespace

AttributedGraph gen_erdos(int n, double p, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_erdos requires n >= 1");
  check_probability(p, "p");
  SplitMix64 rng(seed);
  AttributedGraph g;
  g.num_nodes = n;
  sample_pair_edges(g, rng, [&](int, int) { return p; });
  g.node_features.assign(static_cast<std::size_t>(n), FeatureVec{1.0});
  return g;
}

std::vector<AttributedGraph> gen_erdos_retrieval_dataset(int num_graphs, int n, double p,
                                                         std::uint64_t seed) {
  if (num_graphs < 2)
    throw std::invalid_argument("gen_erdos_retrieval_dataset requires num_graphs >= 2");
  SplitMix64 root(seed);
  std::vector<AttributedGraph> graphs;
  std::vector<std::vector<Edge>> edge_sets;
  for (int k = 0; k < num_graphs; ++k) {
    AttributedGraph candidate;
    bool distinct = false;
    for (int attempt = 0; attempt <= 100 && !distinct; ++attempt) {
      SplitMix64 rng = root.split(static_cast<std::uint64_t>(k) * 1009ULL +
                                  static_cast<std::uint64_t>(attempt));
      candidate = AttributedGraph{};
      candidate.num_nodes = n;
      sample_pair_edges(candidate, rng, [&](int, int) { return p; });
      std::vector<Edge> sorted = candidate.edges;
      std::sort(sorted.begin(), sorted.end());
      distinct = std::none_of(edge_sets.begin(), edge_sets.end(),
                              [&](const std::vector<Edge>& other) { return other == sorted; });
      if (distinct) edge_sets.push_back(std::move(sorted));
    }
    if (!distinct)
      throw numeric_error("could not generate " + std::to_string(num_graphs) +
                          " distinct graphs after 100 retries (graph " + std::to_string(k) + ")");
    candidate.node_features.assign(static_cast<std::size_t>(n), FeatureVec{1.0});
    candidate.graph_label = GraphLabel{static_cast<std::int64_t>(k)};
    graphs.push_back(std::move(candidate));
  }
  return graphs;
}

AttributedGraph gen_neighborsmatch(int r_p, std::uint64_t seed) {
  if (r_p < 1) throw std::invalid_argument("gen_neighborsmatch requires depth >= 1");
  if (r_p > 20) throw std::invalid_argument("tree depth too large");
  const int num_leaves = 1 << r_p;
  const int num_nodes = (1 << (r_p + 1)) - 1;
  const int first_leaf = num_leaves - 1;  // heap indexing: leaves occupy the last level

  SplitMix64 rng(seed);
  const std::vector<std::size_t> markers = rng.permutation(static_cast<std::size_t>(num_leaves));
  const int query_leaf = static_cast<int>(rng.below(static_cast<std::uint64_t>(num_leaves)));
  const int query_count = static_cast<int>(markers[static_cast<std::size_t>(query_leaf)]);

  AttributedGraph g;
  g.num_nodes = num_nodes;
  for (int parent = 0; parent < first_leaf; ++parent) {
    for (int child : {2 * parent + 1, 2 * parent + 2}) {
      g.edges.push_back(Edge{parent, child});
      g.edges.push_back(Edge{child, parent});
    }
  }

  // Feature layout: [marker/query one-hot | class one-hot | role one-hot].
  const int dim = 2 * num_leaves + 3;
  g.node_features.assign(static_cast<std::size_t>(num_nodes),
                         FeatureVec(static_cast<std::size_t>(dim), 0.0));
  constexpr int kRoleRoot = 0, kRoleLeaf = 1, kRoleInternal = 2;
  for (int v = 0; v < num_nodes; ++v) {
    FeatureVec& f = g.node_features[static_cast<std::size_t>(v)];
    if (v == 0) {
      f[static_cast<std::size_t>(query_count)] = 1.0;
      f[static_cast<std::size_t>(2 * num_leaves + kRoleRoot)] = 1.0;
    } else if (v >= first_leaf) {
      const int leaf_index = v - first_leaf;
      f[markers[static_cast<std::size_t>(leaf_index)]] = 1.0;
      f[static_cast<std::size_t>(num_leaves + leaf_index)] = 1.0;
      f[static_cast<std::size_t>(2 * num_leaves + kRoleLeaf)] = 1.0;
    } else {
      f[static_cast<std::size_t>(2 * num_leaves + kRoleInternal)] = 1.0;
    }
  }
  g.graph_label = GraphLabel{static_cast<std::int64_t>(query_leaf)};
  return g;
}

AttributedGraph gen_sbm(const std::vector<int>& block_sizes, double p_in, double p_out,
                        std::uint64_t seed) {
  check_probability(p_in, "p_in");
  check_probability(p_out, "p_out");
  if (block_sizes.empty()) throw std::invalid_argument("gen_sbm requires at least one block");
  std::vector<std::int64_t> labels;
  for (std::size_t b = 0; b < block_sizes.size(); ++b) {
    if (block_sizes[b] < 1) throw std::invalid_argument("block sizes must be >= 1");
    labels.insert(labels.end(), static_cast<std::size_t>(block_sizes[b]),
                  static_cast<std::int64_t>(b));
  }
  SplitMix64 rng(seed);
  AttributedGraph g;
  g.num_nodes = static_cast<int>(labels.size());
  sample_pair_edges(g, rng, [&](int i, int j) {
    return labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? p_in
                                                                                      : p_out;
  });
  g.node_labels = std::move(labels);
  return g;
}

std::vector<AttributedGraph> gen_erdos_batch(int count, int n, double p, std::uint64_t seed) {
  SplitMix64 root(seed);
  std::vector<AttributedGraph> graphs;
  graphs.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    graphs.push_back(gen_erdos(n, p, root.split(static_cast<std::uint64_t>(k)).next()));
  return graphs;
}

std::vector<AttributedGraph> gen_neighborsmatch_batch(int count, int r_p, std::uint64_t seed) {
  SplitMix64 root(seed);
  std::vector<AttributedGraph> graphs;
  graphs.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    graphs.push_back(gen_neighborsmatch(r_p, root.split(static_cast<std::uint64_t>(k)).next()));
  return graphs;
}

std::vector<AttributedGraph> gen_sbm_batch(int count, const std::vector<int>& block_sizes,
                                           double p_in, double p_out, std::uint64_t seed) {
  SplitMix64 root(seed);
  std::vector<AttributedGraph> graphs;
  graphs.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    graphs.push_back(
        gen_sbm(block_sizes, p_in, p_out, root.split(static_cast<std::uint64_t>(k)).next()));
  return graphs;
}

}  // namespace rhop
