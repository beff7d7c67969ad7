#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rhop/graph.hpp"

namespace rhop {

/// G(n, p): each unordered pair is an edge with probability p (both
/// directions added). Every node carries the constant scalar feature 1.0 so
/// that topology is the only classification signal.
AttributedGraph gen_erdos(int n, double p, std::uint64_t seed);

/// num_graphs pairwise-distinct G(n, p) samples labeled 0..num_graphs-1.
/// Colliding edge sets are regenerated (up to 100 retries per graph).
std::vector<AttributedGraph> gen_erdos_retrieval_dataset(int num_graphs, int n, double p,
                                                         std::uint64_t seed);

/// Complete binary tree of depth r_p (2^{r_p+1} - 1 nodes, root = node 0,
/// bidirectional parent-child edges). Each of the 2^{r_p} leaves has a
/// distinct class id (its position among the leaves) and a marker count drawn
/// as a random permutation of 0..2^{r_p}-1; the root carries the query count
/// of one uniformly chosen leaf and the graph label is that leaf's class id.
/// Node features: one-hot(marker or query count) (+) one-hot(class id)
/// (+) one-hot(role in {root, leaf, internal}). The class one-hot makes the
/// task well-posed for permutation-equivariant models (sibling leaves are
/// otherwise indistinguishable).
AttributedGraph gen_neighborsmatch(int r_p, std::uint64_t seed);

/// Stochastic block model: intra-block pairs connect with probability p_in,
/// inter-block with p_out; node labels are block indices.
AttributedGraph gen_sbm(const std::vector<int>& block_sizes, double p_in, double p_out,
                        std::uint64_t seed);

/// Deterministic batch helpers: graph k is generated from split-seed k, so
/// identical (spec, seed) pairs reproduce bit-for-bit.
std::vector<AttributedGraph> gen_erdos_batch(int count, int n, double p, std::uint64_t seed);
std::vector<AttributedGraph> gen_neighborsmatch_batch(int count, int r_p, std::uint64_t seed);
std::vector<AttributedGraph> gen_sbm_batch(int count, const std::vector<int>& block_sizes,
                                           double p_in, double p_out, std::uint64_t seed);

}  // namespace rhop
