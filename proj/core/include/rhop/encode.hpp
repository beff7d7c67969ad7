#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rhop/io.hpp"
#include "rhop/rewire.hpp"

namespace rhop {

/// Reserved shortest-path value for CLS edges. Real paths always have
/// length >= 1, so 0 uniquely flags virtual edges.
inline constexpr std::int64_t kClsShortestPe = 0;

/// Per-edge integer vectors, aligned with the rewired graph's edge list.
/// Shortest-path rows have length 1 (value in {0..r}); adjacency rows have
/// length r ((A^1)_uv .. (A^r)_uv on the original graph).
struct EdgePe {
  PeKind kind = PeKind::shortest;
  int r = 1;
  std::vector<std::vector<std::int64_t>> values;
};

/// Per-node spectral coordinates from eigenvectors 2..q+1 of the normalized
/// Laplacian of the original graph, zero-padded when fewer are available.
/// The CLS node's row is all zeros.
struct NodePe {
  int q = 1;
  int padded = 0;
  std::vector<std::vector<double>> values;
};

struct EncodedGraph {
  RewiredGraph rewired;
  std::optional<EdgePe> edge_pe;
  std::optional<NodePe> node_pe;
};

/// Labels every non-CLS edge with its hop distance in the original graph
/// (original edges get 1, hop-added edges 2..r); CLS edges get the reserved 0.
EncodedGraph encode_shortest_path(const RewiredGraph& rw);

/// Labels edge (u,v) with the walk counts ((A^1)_uv, ..., (A^r)_uv) of the
/// original graph; CLS edges get the zero vector. `num_powers` overrides the
/// vector length (defaults to the rewiring radius).
EncodedGraph encode_adjacency_powers(const RewiredGraph& rw,
                                     std::optional<int> num_powers = std::nullopt);

/// Attaches the q smallest non-trivial Laplacian eigenvectors of the original
/// graph as node coordinates. With a sign_seed, each eigenvector's global
/// sign is flipped with probability 1/2 (training-time augmentation);
/// without, signs stay canonical.
EncodedGraph encode_spectral(const RewiredGraph& rw, int q,
                             std::optional<std::uint64_t> sign_seed = std::nullopt);

/// Diffusion aggregation weight per edge, theta_0 * [u = v] +
/// sum_k theta_k * (p_e)_k, computed from the stored adjacency-power vectors
/// only. thetas has length r + 1.
std::vector<double> diffusion_weights_from_pe(const EncodedGraph& g,
                                              const std::vector<double>& thetas);

/// min{ k : (p_e)_k > 0 } — recovers the shortest-path value from an
/// adjacency-powers vector. Throws on the all-zero vector.
int shortest_from_adjacency(const std::vector<std::int64_t>& pe);

DatasetRecord to_record(const EncodedGraph& g);
EncodedGraph encoded_from_record(const DatasetRecord& record);

}  // namespace rhop
