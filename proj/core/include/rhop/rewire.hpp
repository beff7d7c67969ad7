#pragma once

#include <optional>
#include <vector>

#include "rhop/graph.hpp"
#include "rhop/io.hpp"

namespace rhop {

/// A rewired graph G': the input graph plus hop-added and CLS edges, with
/// per-edge provenance. The original graph is always a subgraph of G' and is
/// recoverable from the provenance tags alone.
struct RewiredGraph {
  AttributedGraph graph;
  std::vector<Provenance> edge_provenance;
  int r = 1;
  std::optional<int> cls_node;
  FeatureVec constant_edge_feature;  // C_e, d_e-dimensional
  FeatureVec constant_node_feature;  // C_v, d_v-dimensional
};

/// Wraps a graph as its own trivial rewiring (r = 1, all edges original).
RewiredGraph identity_rewiring(const AttributedGraph& g);

/// Adds both directed edges for every unordered pair within r hops in g
/// (direction-ignoring distance, never across components). Added edges carry
/// the constant feature c_e (zero vector when omitted) and tag hop_added;
/// originals keep their features and input order, added edges follow sorted
/// by (u, v).
RewiredGraph expand_receptive_field(const AttributedGraph& g, int r, FeatureVec c_e = {});

/// Re-expansion of an already-rewired graph: hop distances are measured on
/// the recovered original, so expansion at the same r is idempotent and CLS
/// insertion composes in either order.
RewiredGraph expand_receptive_field(const RewiredGraph& rw, int r, FeatureVec c_e = {});

/// Appends one CLS node with feature c_v, bidirectionally connected to every
/// existing node through edges tagged cls with feature c_e. When node labels
/// are present the CLS node gets the sentinel label -1.
RewiredGraph add_cls_node(const RewiredGraph& rw, FeatureVec c_v = {}, FeatureVec c_e = {});
RewiredGraph add_cls_node(const AttributedGraph& g, FeatureVec c_v = {}, FeatureVec c_e = {});

/// Exact inverse of the rewiring: keeps edges tagged original and strips the
/// CLS node by its recorded index.
AttributedGraph recover_original(const RewiredGraph& rw);

/// Recovery from a serialized record: uses provenance when present, else a
/// lossless edge encoding (shortest-path p_e = 1, adjacency (p_e)_1 = 1).
/// Throws recover_error when neither is available (e.g. spectral-only).
AttributedGraph recover_original(const DatasetRecord& record);

DatasetRecord to_record(const RewiredGraph& rw);
RewiredGraph rewired_from_record(const DatasetRecord& record);

}  // namespace rhop
