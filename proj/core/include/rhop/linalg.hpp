#pragma once

#include <cstdint>
#include <vector>

#include "rhop/graph.hpp"

namespace rhop {

/// Dense row-major matrix of doubles. Graphs at this scale (a few hundred
/// nodes) never justify sparse plumbing.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

/// Dense integer matrix for exact walk counts.
struct IntMatrix {
  std::size_t n = 0;
  std::vector<std::int64_t> data;

  IntMatrix() = default;
  explicit IntMatrix(std::size_t size) : n(size), data(size * size, 0) {}

  std::int64_t& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;
};

/// A^1..A^r of the symmetrized 0/1 adjacency matrix; powers[k-1] = A^k with
/// exact integer walk counts.
struct AdjacencyPowers {
  int r = 0;
  std::vector<IntMatrix> powers;
};

/// Eigenvalues ascending; eigenvectors orthonormal, stored as columns aligned
/// with the eigenvalues, signs canonicalized (first nonzero coordinate > 0).
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  Matrix eigenvectors;
};

/// Hop distances from `source`, ignoring edge direction, truncated at `cap`
/// (distances beyond cap report kInfiniteDistance).
std::vector<int> bfs_distances(const AttributedGraph& g, int source, int cap);

/// Symmetrized 0/1 adjacency matrix: entry 1 iff either direction is present.
IntMatrix adjacency_matrix(const AttributedGraph& g);

/// Exact integer walk counts with overflow checking; throws numeric_error
/// naming the offending power.
AdjacencyPowers adjacency_powers(const AttributedGraph& g, int r);

/// I - D^{-1/2} A D^{-1/2} over the symmetrized adjacency. Isolated nodes get
/// an identity row/column (their D^{-1/2} entry is taken as 0).
Matrix normalized_laplacian(const AttributedGraph& g);

/// Cyclic Jacobi sweeps. Deterministic: fixed sweep order, no RNG; two calls
/// on the same matrix produce bit-identical results. Converges when the
/// off-diagonal Frobenius norm drops below 1e-12 * ||m||_F; throws
/// numeric_error with the residual after 100 sweeps.
SpectralDecomposition symmetric_eigendecomposition(const Matrix& m);

}  // namespace rhop
