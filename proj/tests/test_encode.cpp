#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "rhop/encode.hpp"
#include "rhop/errors.hpp"
#include "rhop/generate.hpp"
#include "rhop/linalg.hpp"

using namespace rhop;

namespace {

AttributedGraph path_graph(int n) {
  AttributedGraph g;
  g.num_nodes = n;
  for (int i = 0; i + 1 < n; ++i) {
    g.edges.push_back(Edge{i, i + 1});
    g.edges.push_back(Edge{i + 1, i});
  }
  return g;
}

AttributedGraph triangle() {
  AttributedGraph g;
  g.num_nodes = 3;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) g.edges.push_back(Edge{i, j});
  return g;
}

std::size_t edge_index(const AttributedGraph& g, int u, int v) {
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if (g.edges[i].u == u && g.edges[i].v == v) return i;
  REQUIRE(false);
  return 0;
}

}  // namespace

TEST_CASE("shortest-path encoding on an expanded 3-path") {
  const auto encoded = encode_shortest_path(expand_receptive_field(path_graph(3), 2));
  const auto& g = encoded.rewired.graph;
  CHECK(encoded.edge_pe->values[edge_index(g, 0, 2)] == std::vector<std::int64_t>{2});
  CHECK(encoded.edge_pe->values[edge_index(g, 0, 1)] == std::vector<std::int64_t>{1});
  CHECK(encoded.edge_pe->kind == PeKind::shortest);
}

TEST_CASE("r=1 rewiring labels every non-CLS edge 1") {
  const auto g = gen_erdos(9, 0.3, 12);
  auto rw = add_cls_node(expand_receptive_field(g, 1));
  const auto encoded = encode_shortest_path(rw);
  for (std::size_t i = 0; i < encoded.edge_pe->values.size(); ++i) {
    const auto expected = encoded.rewired.edge_provenance[i] == Provenance::cls
                              ? std::int64_t{0}
                              : std::int64_t{1};
    CHECK(encoded.edge_pe->values[i][0] == expected);
  }
}

TEST_CASE("shortest-path labels match the all-pairs oracle") {
  const auto g = gen_erdos(12, 0.25, 5);
  const auto fw = oracle::floyd_warshall(g);
  const auto encoded = encode_shortest_path(expand_receptive_field(g, 3));
  for (std::size_t i = 0; i < encoded.rewired.graph.edges.size(); ++i) {
    const Edge& e = encoded.rewired.graph.edges[i];
    CHECK(encoded.edge_pe->values[i][0] == fw[e.u][e.v]);
  }
}

TEST_CASE("adjacency-powers encoding on small shapes") {
  SUBCASE("expanded 3-path") {
    const auto encoded = encode_adjacency_powers(expand_receptive_field(path_graph(3), 2));
    const auto& g = encoded.rewired.graph;
    CHECK(encoded.edge_pe->values[edge_index(g, 0, 2)] == std::vector<std::int64_t>{0, 1});
    CHECK(encoded.edge_pe->values[edge_index(g, 0, 1)] == std::vector<std::int64_t>{1, 0});
  }
  SUBCASE("triangle counts the 2-walk through the third node") {
    const auto encoded = encode_adjacency_powers(expand_receptive_field(triangle(), 2));
    const auto& g = encoded.rewired.graph;
    CHECK(encoded.edge_pe->values[edge_index(g, 0, 1)] == std::vector<std::int64_t>{1, 1});
  }
  SUBCASE("r=1 gives (1) on every original edge") {
    const auto g = gen_erdos(8, 0.4, 9);
    const auto encoded = encode_adjacency_powers(expand_receptive_field(g, 1));
    for (const auto& row : encoded.edge_pe->values) CHECK(row == std::vector<std::int64_t>{1});
  }
}

TEST_CASE("adjacency rows match brute-force walk counts") {
  const auto g = gen_erdos(10, 0.3, 44);
  const auto encoded = encode_adjacency_powers(expand_receptive_field(g, 3));
  for (std::size_t i = 0; i < encoded.rewired.graph.edges.size(); ++i) {
    const Edge& e = encoded.rewired.graph.edges[i];
    for (int k = 1; k <= 3; ++k)
      CHECK(encoded.edge_pe->values[i][k - 1] == oracle::count_walks(g, e.u, e.v, k));
  }
}

TEST_CASE("CLS edges get reserved encodings") {
  const auto g = gen_erdos(7, 0.35, 19);
  const auto rw = add_cls_node(expand_receptive_field(g, 2));
  const auto shortest = encode_shortest_path(rw);
  const auto adjacency = encode_adjacency_powers(rw);
  for (std::size_t i = 0; i < rw.edge_provenance.size(); ++i) {
    if (rw.edge_provenance[i] != Provenance::cls) continue;
    CHECK(shortest.edge_pe->values[i] == std::vector<std::int64_t>{kClsShortestPe});
    CHECK(adjacency.edge_pe->values[i] == std::vector<std::int64_t>{0, 0});
  }
}

TEST_CASE("spectral encoding of a single edge") {
  AttributedGraph g;
  g.num_nodes = 2;
  g.edges = {Edge{0, 1}, Edge{1, 0}};
  const auto encoded = encode_spectral(identity_rewiring(g), 1);
  const double x = 1.0 / std::sqrt(2.0);
  // Canonical sign: first nonzero coordinate positive.
  CHECK(encoded.node_pe->values[0][0] == doctest::Approx(x));
  CHECK(encoded.node_pe->values[1][0] == doctest::Approx(-x));
}

TEST_CASE("degenerate eigenspace: subspace contract only") {
  const auto encoded = encode_spectral(identity_rewiring(triangle()), 2);
  const auto& pe = encoded.node_pe->values;
  // Columns orthonormal and satisfying the eigen-residual at lambda = 1.5.
  const Matrix lap = normalized_laplacian(triangle());
  for (int col = 0; col < 2; ++col) {
    double norm = 0.0;
    for (int i = 0; i < 3; ++i) norm += pe[i][col] * pe[i][col];
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-8));
    for (int i = 0; i < 3; ++i) {
      double lhs = 0.0;
      for (int j = 0; j < 3; ++j) lhs += lap(i, j) * pe[j][col];
      CHECK(std::abs(lhs - 1.5 * pe[i][col]) < 1e-8);
    }
  }
  double cross = 0.0;
  for (int i = 0; i < 3; ++i) cross += pe[i][0] * pe[i][1];
  CHECK(std::abs(cross) < 1e-8);
}

TEST_CASE("spectral padding beyond n-1 coordinates") {
  const auto g = path_graph(4);
  const auto encoded = encode_spectral(identity_rewiring(g), 7);
  CHECK(encoded.node_pe->q == 7);
  CHECK(encoded.node_pe->padded == 4);
  for (const auto& row : encoded.node_pe->values) {
    REQUIRE(row.size() == 7);
    for (std::size_t j = 3; j < 7; ++j) CHECK(row[j] == 0.0);
  }
}

TEST_CASE("CLS node gets the zero spectral vector") {
  const auto g = gen_erdos(6, 0.5, 77);
  const auto encoded = encode_spectral(add_cls_node(identity_rewiring(g)), 3);
  const auto& row = encoded.node_pe->values.back();
  for (double x : row) CHECK(x == 0.0);
}

TEST_CASE("sign flips preserve orthonormality and residuals") {
  const auto g = gen_erdos(10, 0.4, 91);
  const auto decomposition = symmetric_eigendecomposition(normalized_laplacian(g));
  const auto base = encode_spectral(identity_rewiring(g), 4);

  bool any_flip = false;
  for (std::uint64_t sign_seed = 1; sign_seed <= 10; ++sign_seed) {
    const auto flipped = encode_spectral(identity_rewiring(g), 4, sign_seed);
    for (int col = 0; col < 4; ++col) {
      double dot = 0.0, base_norm = 0.0, flip_norm = 0.0;
      for (int i = 0; i < g.num_nodes; ++i) {
        dot += base.node_pe->values[i][col] * flipped.node_pe->values[i][col];
        base_norm += base.node_pe->values[i][col] * base.node_pe->values[i][col];
        flip_norm += flipped.node_pe->values[i][col] * flipped.node_pe->values[i][col];
      }
      CHECK(flip_norm == doctest::Approx(base_norm).epsilon(1e-10));
      CHECK(std::abs(std::abs(dot) - base_norm) < 1e-10);  // same column up to sign
      if (dot < 0.0) any_flip = true;
      // Eigen-residual unchanged under the flip.
      const double lambda = decomposition.eigenvalues[static_cast<std::size_t>(col) + 1];
      const Matrix lap = normalized_laplacian(g);
      for (int i = 0; i < g.num_nodes; ++i) {
        double lhs = 0.0;
        for (int j = 0; j < g.num_nodes; ++j) lhs += lap(i, j) * flipped.node_pe->values[j][col];
        CHECK(std::abs(lhs - lambda * flipped.node_pe->values[i][col]) < 2e-8);
      }
    }
  }
  CHECK(any_flip);
}

TEST_CASE("diffusion weights from stored PEs") {
  SUBCASE("theta (1, 0.5) on a 3-path at r=1") {
    const auto encoded = encode_adjacency_powers(expand_receptive_field(path_graph(3), 1));
    const auto weights = diffusion_weights_from_pe(encoded, {1.0, 0.5});
    const auto& g = encoded.rewired.graph;
    CHECK(weights[edge_index(g, 0, 1)] == doctest::Approx(0.5));
  }
  SUBCASE("all-zero thetas give all-zero weights") {
    const auto encoded = encode_adjacency_powers(expand_receptive_field(triangle(), 2));
    for (double w : diffusion_weights_from_pe(encoded, {0.0, 0.0, 0.0})) CHECK(w == 0.0);
  }
  SUBCASE("theta (0, 1, 0.25) on the triangle at r=2") {
    const auto encoded = encode_adjacency_powers(expand_receptive_field(triangle(), 2));
    const auto weights = diffusion_weights_from_pe(encoded, {0.0, 1.0, 0.25});
    const auto& g = encoded.rewired.graph;
    CHECK(weights[edge_index(g, 0, 1)] == doctest::Approx(1.25));
  }
  SUBCASE("length mismatch is rejected") {
    const auto encoded = encode_adjacency_powers(expand_receptive_field(triangle(), 2));
    CHECK_THROWS_AS(diffusion_weights_from_pe(encoded, {1.0, 0.5}), std::invalid_argument);
  }
}

TEST_CASE("diffusion weights equal the direct matrix evaluation exactly") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = gen_erdos(11, 0.3, seed + 300);
    const int r = 4;
    const auto encoded = encode_adjacency_powers(expand_receptive_field(g, r));
    std::vector<double> thetas;
    for (int k = 0; k <= r; ++k) thetas.push_back(std::pow(2.0, -k));
    const auto weights = diffusion_weights_from_pe(encoded, thetas);
    const auto powers = adjacency_powers(g, r);
    for (std::size_t i = 0; i < encoded.rewired.graph.edges.size(); ++i) {
      const Edge& e = encoded.rewired.graph.edges[i];
      double direct = e.u == e.v ? thetas[0] : 0.0;
      for (int k = 1; k <= r; ++k)
        direct += thetas[static_cast<std::size_t>(k)] *
                  static_cast<double>(powers.powers[k - 1](e.u, e.v));
      CHECK(weights[i] == direct);  // bitwise: same summation order
    }
  }
}

TEST_CASE("shortest_from_adjacency basics") {
  CHECK(shortest_from_adjacency({0, 1}) == 2);
  CHECK(shortest_from_adjacency({1, 1}) == 1);
  CHECK_THROWS_AS(shortest_from_adjacency({0, 0, 0}), std::invalid_argument);
}

TEST_CASE("cross-consistency of the two edge encodings") {
  const auto g = gen_erdos(12, 0.25, 5);
  const auto rw = expand_receptive_field(g, 4);
  const auto adjacency = encode_adjacency_powers(rw);
  const auto shortest = encode_shortest_path(rw);
  for (std::size_t i = 0; i < rw.graph.edges.size(); ++i) {
    if (rw.edge_provenance[i] == Provenance::cls) continue;
    CHECK(shortest_from_adjacency(adjacency.edge_pe->values[i]) ==
          shortest.edge_pe->values[i][0]);
  }
}

TEST_CASE("losslessness: original edges recoverable from PEs alone") {
  auto check_family = [](const std::vector<AttributedGraph>& graphs) {
    for (const auto& g : graphs) {
      const auto rw = expand_receptive_field(g, 3);
      for (bool use_adjacency : {false, true}) {
        const auto encoded =
            use_adjacency ? encode_adjacency_powers(rw) : encode_shortest_path(rw);
        DatasetRecord record = to_record(encoded);
        record.edge_provenance.reset();
        CHECK(recover_original(record) == g);
      }
    }
  };
  check_family(gen_erdos_batch(100, 12, 0.2, 1));
  check_family(gen_sbm_batch(100, {5, 5}, 0.6, 0.15, 2));
  std::vector<AttributedGraph> trees;
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto t = gen_neighborsmatch(3, s);
    t.graph_label.reset();
    t.node_features.clear();
    trees.push_back(t);
  }
  check_family(trees);
}

TEST_CASE("locality: edits far from an edge leave its encodings unchanged") {
  // Path 0..9; edge (0,1) and edits at node 8-9, distance > r from both ends.
  const auto g = path_graph(10);
  const int r = 3;
  auto surgery = g;
  surgery.edges.push_back(Edge{7, 9});
  surgery.edges.push_back(Edge{9, 7});

  const auto base_short = encode_shortest_path(expand_receptive_field(g, r));
  const auto edit_short = encode_shortest_path(expand_receptive_field(surgery, r));
  const auto base_adj = encode_adjacency_powers(expand_receptive_field(g, r));
  const auto edit_adj = encode_adjacency_powers(expand_receptive_field(surgery, r));

  auto pe_of = [](const EncodedGraph& e, int u, int v) {
    return e.edge_pe->values[edge_index(e.rewired.graph, u, v)];
  };
  for (auto [u, v] : {std::pair{0, 1}, std::pair{1, 2}, std::pair{0, 2}}) {
    CHECK(pe_of(base_short, u, v) == pe_of(edit_short, u, v));
    CHECK(pe_of(base_adj, u, v) == pe_of(edit_adj, u, v));
  }

  // Spectral encoding is global: the same edit changes some coordinate.
  const auto base_lp = encode_spectral(identity_rewiring(g), 3);
  const auto edit_lp = encode_spectral(identity_rewiring(surgery), 3);
  bool changed = false;
  for (int i = 0; i < g.num_nodes && !changed; ++i)
    for (int j = 0; j < 3 && !changed; ++j)
      if (std::abs(base_lp.node_pe->values[i][j] - edit_lp.node_pe->values[i][j]) > 1e-9)
        changed = true;
  CHECK(changed);
}

TEST_CASE("encoded records round-trip through serialization") {
  const auto g = gen_erdos(8, 0.3, 64);
  const auto encoded = encode_adjacency_powers(expand_receptive_field(g, 2));
  const DatasetRecord record = to_record(encoded);
  const EncodedGraph back = encoded_from_record(record);
  CHECK(back.rewired.graph == encoded.rewired.graph);
  CHECK(back.edge_pe->values == encoded.edge_pe->values);
  CHECK(back.edge_pe->r == encoded.edge_pe->r);
}
