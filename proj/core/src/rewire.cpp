#include "rhop/rewire.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "rhop/errors.hpp"
#include "rhop/linalg.hpp"

namespace rhop {

namespace {

FeatureVec resolve_constant(FeatureVec given, int dim, const char* name) {
  if (given.empty()) return FeatureVec(static_cast<std::size_t>(dim), 0.0);
  if (given.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument(std::string(name) + " dimension mismatch (expected " +
                                std::to_string(dim) + ", got " + std::to_string(given.size()) + ")");
  return given;
}

}  // namespace

RewiredGraph identity_rewiring(const AttributedGraph& g) {
  RewiredGraph rw;
  rw.graph = g;
  rw.edge_provenance.assign(g.edges.size(), Provenance::original);
  rw.r = 1;
  rw.constant_edge_feature = FeatureVec(static_cast<std::size_t>(g.edge_feature_dim()), 0.0);
  rw.constant_node_feature = FeatureVec(static_cast<std::size_t>(g.node_feature_dim()), 0.0);
  return rw;
}

RewiredGraph expand_receptive_field(const AttributedGraph& g, int r, FeatureVec c_e) {
  if (r < 1) throw std::invalid_argument("expand_receptive_field requires r >= 1");
  const int de = g.edge_feature_dim();
  c_e = resolve_constant(std::move(c_e), de, "c_e");

  std::set<std::pair<int, int>> have;
  for (const Edge& e : g.edges) have.emplace(e.u, e.v);

  std::vector<Edge> added;
  for (int u = 0; u < g.num_nodes; ++u) {
    const auto dist = bfs_distances(g, u, r);
    for (int v = u + 1; v < g.num_nodes; ++v) {
      const int d = dist[static_cast<std::size_t>(v)];
      if (d == kInfiniteDistance || d > r) continue;
      if (!have.count({u, v})) added.push_back(Edge{u, v});
      if (!have.count({v, u})) added.push_back(Edge{v, u});
    }
  }
  std::sort(added.begin(), added.end());

  RewiredGraph rw = identity_rewiring(g);
  rw.r = r;
  rw.constant_edge_feature = c_e;
  for (const Edge& e : added) {
    rw.graph.edges.push_back(e);
    if (de > 0) rw.graph.edge_features.push_back(c_e);
    rw.edge_provenance.push_back(Provenance::hop_added);
  }
  return rw;
}

RewiredGraph expand_receptive_field(const RewiredGraph& rw, int r, FeatureVec c_e) {
  const AttributedGraph original = recover_original(rw);
  RewiredGraph out = expand_receptive_field(original, r, std::move(c_e));
  if (rw.cls_node) out = add_cls_node(out, rw.constant_node_feature, rw.constant_edge_feature);
  return out;
}

RewiredGraph add_cls_node(const RewiredGraph& rw, FeatureVec c_v, FeatureVec c_e) {
  if (rw.cls_node) throw std::invalid_argument("CLS node already present");
  const int dv = rw.graph.node_feature_dim();
  const int de = rw.graph.edge_feature_dim();
  c_v = resolve_constant(std::move(c_v), dv, "c_v");
  c_e = resolve_constant(std::move(c_e), de, "c_e");

  RewiredGraph out = rw;
  const int cls = out.graph.num_nodes;
  out.graph.num_nodes += 1;
  if (dv > 0) out.graph.node_features.push_back(c_v);
  if (out.graph.node_labels) out.graph.node_labels->push_back(-1);
  for (int v = 0; v < cls; ++v) {
    out.graph.edges.push_back(Edge{cls, v});
    out.graph.edges.push_back(Edge{v, cls});
    if (de > 0) {
      out.graph.edge_features.push_back(c_e);
      out.graph.edge_features.push_back(c_e);
    }
    out.edge_provenance.push_back(Provenance::cls);
    out.edge_provenance.push_back(Provenance::cls);
  }
  out.cls_node = cls;
  out.constant_node_feature = c_v;
  out.constant_edge_feature = c_e;
  return out;
}

RewiredGraph add_cls_node(const AttributedGraph& g, FeatureVec c_v, FeatureVec c_e) {
  return add_cls_node(identity_rewiring(g), std::move(c_v), std::move(c_e));
}

namespace {

/// Keeps edges at the flagged positions and removes the CLS node (if any),
/// remapping indices past it.
AttributedGraph rebuild_original(const AttributedGraph& g, const std::vector<bool>& keep,
                                 std::optional<int> cls_node) {
  AttributedGraph out;
  out.num_nodes = g.num_nodes - (cls_node ? 1 : 0);
  out.graph_label = g.graph_label;
  const bool has_edge_features = !g.edge_features.empty();
  auto remap = [&](int v) { return (cls_node && v > *cls_node) ? v - 1 : v; };
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (!keep[i]) continue;
    const Edge& e = g.edges[i];
    if (cls_node && (e.u == *cls_node || e.v == *cls_node))
      throw recover_error("edge marked original touches the CLS node");
    out.edges.push_back(Edge{remap(e.u), remap(e.v)});
    if (has_edge_features) out.edge_features.push_back(g.edge_features[i]);
  }
  if (!g.node_features.empty()) {
    for (int v = 0; v < g.num_nodes; ++v)
      if (!cls_node || v != *cls_node)
        out.node_features.push_back(g.node_features[static_cast<std::size_t>(v)]);
  }
  if (g.node_labels) {
    std::vector<std::int64_t> labels;
    for (int v = 0; v < g.num_nodes; ++v)
      if (!cls_node || v != *cls_node)
        labels.push_back((*g.node_labels)[static_cast<std::size_t>(v)]);
    out.node_labels = std::move(labels);
  }
  return out;
}

}  // namespace

AttributedGraph recover_original(const RewiredGraph& rw) {
  if (rw.edge_provenance.size() != rw.graph.edges.size())
    throw recover_error("provenance length mismatch");
  std::vector<bool> keep(rw.graph.edges.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    keep[i] = rw.edge_provenance[i] == Provenance::original;
  return rebuild_original(rw.graph, keep, rw.cls_node);
}

AttributedGraph recover_original(const DatasetRecord& record) {
  std::optional<int> cls_node;
  if (record.rewire_meta) cls_node = record.rewire_meta->cls_node;

  if (record.edge_provenance) {
    RewiredGraph rw;
    rw.graph = record.graph;
    rw.edge_provenance = *record.edge_provenance;
    rw.cls_node = cls_node;
    if (record.rewire_meta) rw.r = record.rewire_meta->r;
    return recover_original(rw);
  }
  if (record.edge_pe && record.pe_kind &&
      (*record.pe_kind == PeKind::shortest || *record.pe_kind == PeKind::adjacency)) {
    const auto& pe = *record.edge_pe;
    std::vector<bool> keep(record.graph.edges.size(), false);
    for (std::size_t i = 0; i < pe.size(); ++i) {
      if (pe[i].empty()) throw recover_error("empty positional-encoding vector");
      keep[i] = pe[i].front() == 1;
    }
    return rebuild_original(record.graph, keep, cls_node);
  }
  throw recover_error(
      "not recoverable: record has neither provenance tags nor a lossless edge encoding");
}

DatasetRecord to_record(const RewiredGraph& rw) {
  DatasetRecord record;
  record.graph = rw.graph;
  record.edge_provenance = rw.edge_provenance;
  record.rewire_meta = RewireMeta{rw.r, rw.cls_node};
  return record;
}

RewiredGraph rewired_from_record(const DatasetRecord& record) {
  RewiredGraph rw;
  rw.graph = record.graph;
  if (record.edge_provenance) {
    rw.edge_provenance = *record.edge_provenance;
  } else {
    rw.edge_provenance.assign(rw.graph.edges.size(), Provenance::original);
  }
  if (record.rewire_meta) {
    rw.r = record.rewire_meta->r;
    rw.cls_node = record.rewire_meta->cls_node;
  }
  rw.constant_edge_feature = FeatureVec(static_cast<std::size_t>(rw.graph.edge_feature_dim()), 0.0);
  rw.constant_node_feature = FeatureVec(static_cast<std::size_t>(rw.graph.node_feature_dim()), 0.0);
  return rw;
}

}  // namespace rhop
