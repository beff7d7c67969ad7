#include "rhop/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>

namespace rhop {

namespace {

std::string prefixed(const std::string& context, const std::string& msg) {
  return context.empty() ? msg : msg + ", " + context;
}

/// Undirected adjacency lists from the directed edge list.
std::vector<std::vector<int>> undirected_adjacency(const AttributedGraph& g) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.num_nodes));
  std::vector<std::set<int>> seen(static_cast<std::size_t>(g.num_nodes));
  for (const Edge& e : g.edges) {
    if (seen[static_cast<std::size_t>(e.u)].insert(e.v).second)
      adj[static_cast<std::size_t>(e.u)].push_back(e.v);
    if (seen[static_cast<std::size_t>(e.v)].insert(e.u).second)
      adj[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  return adj;
}

std::vector<int> bfs_undirected(const std::vector<std::vector<int>>& adj, int source) {
  std::vector<int> dist(adj.size(), kInfiniteDistance);
  dist[static_cast<std::size_t>(source)] = 0;
  std::queue<int> frontier;
  frontier.push(source);
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] == kInfiniteDistance) {
        dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

}  // namespace

void validate_graph(const AttributedGraph& g, const std::string& context) {
  if (g.num_nodes < 0) throw std::invalid_argument(prefixed(context, "negative num_nodes"));
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : g.edges) {
    if (e.u < 0 || e.v < 0 || e.u >= g.num_nodes || e.v >= g.num_nodes)
      throw std::invalid_argument(prefixed(context, "endpoint out of range"));
    if (e.u == e.v) throw std::invalid_argument(prefixed(context, "self-loop forbidden"));
    if (!seen.emplace(e.u, e.v).second)
      throw std::invalid_argument(prefixed(context, "duplicate directed edge"));
  }
  if (!g.node_features.empty()) {
    if (g.node_features.size() != static_cast<std::size_t>(g.num_nodes))
      throw std::invalid_argument(prefixed(context, "node_features length mismatch"));
    const std::size_t d = g.node_features.front().size();
    if (d == 0) throw std::invalid_argument(prefixed(context, "empty per-node feature vector"));
    for (const auto& f : g.node_features)
      if (f.size() != d)
        throw std::invalid_argument(prefixed(context, "ragged node feature dimensions"));
  }
  if (!g.edge_features.empty()) {
    if (g.edge_features.size() != g.edges.size())
      throw std::invalid_argument(prefixed(context, "edge_features length mismatch"));
    const std::size_t d = g.edge_features.front().size();
    if (d == 0) throw std::invalid_argument(prefixed(context, "empty per-edge feature vector"));
    for (const auto& f : g.edge_features)
      if (f.size() != d)
        throw std::invalid_argument(prefixed(context, "ragged edge feature dimensions"));
  }
  if (g.node_labels && g.node_labels->size() != static_cast<std::size_t>(g.num_nodes))
    throw std::invalid_argument(prefixed(context, "node_labels length mismatch"));
}

void validate_dataset(const std::vector<AttributedGraph>& graphs) {
  if (graphs.empty()) return;
  const int dv = graphs.front().node_feature_dim();
  const int de = graphs.front().edge_feature_dim();
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    validate_graph(graphs[i], "graph " + std::to_string(i));
    if (graphs[i].node_feature_dim() != dv)
      throw std::invalid_argument("node feature dimension mismatch, graph " + std::to_string(i));
    if (graphs[i].edge_feature_dim() != de)
      throw std::invalid_argument("edge feature dimension mismatch, graph " + std::to_string(i));
  }
}

double density(const AttributedGraph& g) {
  if (g.num_nodes < 1) throw std::invalid_argument("density requires num_nodes >= 1");
  const double n = static_cast<double>(g.num_nodes);
  return static_cast<double>(g.edges.size()) / (n * n);
}

double homophily(const AttributedGraph& g) {
  if (!g.node_labels) throw std::invalid_argument("homophily requires node labels");
  if (g.edges.empty()) throw std::invalid_argument("homophily requires at least one edge");
  const auto& labels = *g.node_labels;
  std::size_t matching = 0;
  for (const Edge& e : g.edges)
    if (labels[static_cast<std::size_t>(e.u)] == labels[static_cast<std::size_t>(e.v)]) ++matching;
  return static_cast<double>(matching) / static_cast<double>(g.edges.size());
}

int diameter(const AttributedGraph& g) {
  if (g.num_nodes < 1) throw std::invalid_argument("diameter requires num_nodes >= 1");
  const auto adj = undirected_adjacency(g);
  int best = 0;
  for (int s = 0; s < g.num_nodes; ++s) {
    const auto dist = bfs_undirected(adj, s);
    for (int d : dist) {
      if (d == kInfiniteDistance) return kInfiniteDistance;
      best = std::max(best, d);
    }
  }
  return best;
}

GraphStats compute_stats(const AttributedGraph& g) {
  GraphStats stats;
  stats.density = density(g);
  stats.diameter = diameter(g);
  stats.num_edges = g.num_edges();
  if (g.node_labels && !g.edges.empty()) stats.homophily = homophily(g);
  return stats;
}

std::vector<HomophilyBucket> homophily_buckets(const std::vector<AttributedGraph>& graphs, int k) {
  if (k < 1) throw std::invalid_argument("homophily_buckets requires k >= 1");
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i) scored.emplace_back(homophily(graphs[i]), i);
  std::stable_sort(scored.begin(), scored.end());

  const std::size_t n = scored.size();
  const std::size_t buckets = std::min<std::size_t>(static_cast<std::size_t>(k), std::max<std::size_t>(n, 1));
  std::vector<HomophilyBucket> out;
  std::size_t base = n / buckets, rem = n % buckets, pos = 0;
  for (std::size_t b = 0; b < buckets; ++b) {
    std::size_t size = base + (b < rem ? 1 : 0);
    HomophilyBucket bucket;
    for (std::size_t i = 0; i < size; ++i, ++pos) {
      if (bucket.graph_indices.empty()) bucket.score_lo = scored[pos].first;
      bucket.score_hi = scored[pos].first;
      bucket.graph_indices.push_back(scored[pos].second);
    }
    out.push_back(std::move(bucket));
  }
  return out;
}

}  // namespace rhop
