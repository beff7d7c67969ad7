#include "rhop/encode.hpp"

#include <stdexcept>
#include <string>

#include "rhop/errors.hpp"
#include "rhop/linalg.hpp"
#include "rhop/rng.hpp"

namespace rhop {

namespace {

void require_provenance(const RewiredGraph& rw) {
  if (rw.edge_provenance.size() != rw.graph.edges.size())
    throw std::invalid_argument("rewired graph lacks aligned provenance tags");
}

}  // namespace

EncodedGraph encode_shortest_path(const RewiredGraph& rw) {
  require_provenance(rw);
  const AttributedGraph original = recover_original(rw);

  // Distances on the original graph; endpoints of non-CLS edges are original
  // node indices because the CLS node is always appended last.
  std::vector<std::vector<int>> dist(static_cast<std::size_t>(original.num_nodes));
  for (int s = 0; s < original.num_nodes; ++s)
    dist[static_cast<std::size_t>(s)] = bfs_distances(original, s, rw.r);

  EdgePe pe;
  pe.kind = PeKind::shortest;
  pe.r = rw.r;
  pe.values.reserve(rw.graph.edges.size());
  for (std::size_t i = 0; i < rw.graph.edges.size(); ++i) {
    if (rw.edge_provenance[i] == Provenance::cls) {
      pe.values.push_back({kClsShortestPe});
      continue;
    }
    const Edge& e = rw.graph.edges[i];
    const int d = dist[static_cast<std::size_t>(e.u)][static_cast<std::size_t>(e.v)];
    if (d == kInfiniteDistance || d < 1 || d > rw.r)
      throw numeric_error("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                          ") has no path of length <= r in the original graph");
    pe.values.push_back({static_cast<std::int64_t>(d)});
  }

  EncodedGraph out;
  out.rewired = rw;
  out.edge_pe = std::move(pe);
  return out;
}

EncodedGraph encode_adjacency_powers(const RewiredGraph& rw, std::optional<int> num_powers) {
  require_provenance(rw);
  const int r = num_powers.value_or(rw.r);
  if (r < 1) throw std::invalid_argument("adjacency encoding requires r >= 1");
  const AttributedGraph original = recover_original(rw);
  const AdjacencyPowers powers = adjacency_powers(original, r);

  EdgePe pe;
  pe.kind = PeKind::adjacency;
  pe.r = r;
  pe.values.reserve(rw.graph.edges.size());
  for (std::size_t i = 0; i < rw.graph.edges.size(); ++i) {
    std::vector<std::int64_t> row(static_cast<std::size_t>(r), 0);
    if (rw.edge_provenance[i] != Provenance::cls) {
      const Edge& e = rw.graph.edges[i];
      for (int k = 0; k < r; ++k)
        row[static_cast<std::size_t>(k)] = powers.powers[static_cast<std::size_t>(k)](
            static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v));
    }
    pe.values.push_back(std::move(row));
  }

  EncodedGraph out;
  out.rewired = rw;
  out.edge_pe = std::move(pe);
  return out;
}

EncodedGraph encode_spectral(const RewiredGraph& rw, int q,
                             std::optional<std::uint64_t> sign_seed) {
  if (q < 1) throw std::invalid_argument("spectral encoding requires q >= 1");
  require_provenance(rw);
  const AttributedGraph original = recover_original(rw);
  const int n = original.num_nodes;

  const SpectralDecomposition decomposition =
      symmetric_eigendecomposition(normalized_laplacian(original));

  const int available = std::max(0, n - 1);  // non-trivial eigenvectors
  const int used = std::min(q, available);

  std::vector<double> column_sign(static_cast<std::size_t>(used), 1.0);
  if (sign_seed) {
    SplitMix64 rng(*sign_seed);
    for (int k = 0; k < used; ++k)
      if (rng.bernoulli(0.5)) column_sign[static_cast<std::size_t>(k)] = -1.0;
  }

  NodePe pe;
  pe.q = q;
  pe.padded = q - used;
  pe.values.assign(static_cast<std::size_t>(rw.graph.num_nodes),
                   std::vector<double>(static_cast<std::size_t>(q), 0.0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < used; ++k)
      pe.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
          column_sign[static_cast<std::size_t>(k)] *
          decomposition.eigenvectors(static_cast<std::size_t>(i), static_cast<std::size_t>(k + 1));
  // Rows beyond n (the CLS node, if any) stay zero.

  EncodedGraph out;
  out.rewired = rw;
  out.node_pe = std::move(pe);
  return out;
}

std::vector<double> diffusion_weights_from_pe(const EncodedGraph& g,
                                              const std::vector<double>& thetas) {
  if (!g.edge_pe || g.edge_pe->kind != PeKind::adjacency)
    throw std::invalid_argument("diffusion weights require an adjacency-powers encoding");
  const int r = g.edge_pe->r;
  if (thetas.size() != static_cast<std::size_t>(r) + 1)
    throw std::invalid_argument("thetas length mismatch (expected " + std::to_string(r + 1) +
                                ", got " + std::to_string(thetas.size()) + ")");
  std::vector<double> weights;
  weights.reserve(g.rewired.graph.edges.size());
  for (std::size_t i = 0; i < g.rewired.graph.edges.size(); ++i) {
    const Edge& e = g.rewired.graph.edges[i];
    double w = e.u == e.v ? thetas[0] : 0.0;
    const auto& pe = g.edge_pe->values[i];
    for (int k = 1; k <= r; ++k)
      w += thetas[static_cast<std::size_t>(k)] *
           static_cast<double>(pe[static_cast<std::size_t>(k - 1)]);
    weights.push_back(w);
  }
  return weights;
}

int shortest_from_adjacency(const std::vector<std::int64_t>& pe) {
  for (std::size_t k = 0; k < pe.size(); ++k)
    if (pe[k] > 0) return static_cast<int>(k) + 1;
  throw std::invalid_argument("all-zero adjacency-powers vector has no shortest path");
}

DatasetRecord to_record(const EncodedGraph& g) {
  DatasetRecord record = to_record(g.rewired);
  if (g.edge_pe) {
    record.pe_kind = g.edge_pe->kind;
    record.edge_pe = g.edge_pe->values;
    PeMeta meta;
    meta.r = g.edge_pe->r;
    record.pe_meta = meta;
  }
  if (g.node_pe) {
    record.pe_kind = PeKind::spectral;
    record.node_pe = g.node_pe->values;
    PeMeta meta;
    meta.q = g.node_pe->q;
    meta.padded = g.node_pe->padded;
    record.pe_meta = meta;
  }
  return record;
}

EncodedGraph encoded_from_record(const DatasetRecord& record) {
  EncodedGraph g;
  g.rewired = rewired_from_record(record);
  if (record.edge_pe && record.pe_kind && *record.pe_kind != PeKind::spectral) {
    EdgePe pe;
    pe.kind = *record.pe_kind;
    pe.r = record.pe_meta && record.pe_meta->r ? *record.pe_meta->r
                                               : (record.edge_pe->empty()
                                                      ? g.rewired.r
                                                      : static_cast<int>(record.edge_pe->front().size()));
    pe.values = *record.edge_pe;
    g.edge_pe = std::move(pe);
  }
  if (record.node_pe) {
    NodePe pe;
    pe.q = record.pe_meta && record.pe_meta->q
               ? *record.pe_meta->q
               : (record.node_pe->empty() ? 1 : static_cast<int>(record.node_pe->front().size()));
    pe.padded = record.pe_meta && record.pe_meta->padded ? *record.pe_meta->padded : 0;
    pe.values = *record.node_pe;
    g.node_pe = std::move(pe);
  }
  return g;
}

}  // namespace rhop
