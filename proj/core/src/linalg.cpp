#include "rhop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

#include "rhop/errors.hpp"

namespace rhop {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul shape mismatch");
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[i * a.cols];
    double* orow = &out.data[i * b.cols];
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = &b.data[k * b.cols];
      for (std::size_t j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
  return out;
}

std::vector<int> bfs_distances(const AttributedGraph& g, int source, int cap) {
  if (source < 0 || source >= g.num_nodes)
    throw std::invalid_argument("bfs source out of range");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.num_nodes));
  for (const Edge& e : g.edges) {
    adj[static_cast<std::size_t>(e.u)].push_back(e.v);
    adj[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  std::vector<int> dist(static_cast<std::size_t>(g.num_nodes), kInfiniteDistance);
  dist[static_cast<std::size_t>(source)] = 0;
  std::queue<int> frontier;
  frontier.push(source);
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop();
    int du = dist[static_cast<std::size_t>(u)];
    if (du >= cap) continue;
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (dist[static_cast<std::size_t>(v)] == kInfiniteDistance) {
        dist[static_cast<std::size_t>(v)] = du + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

IntMatrix adjacency_matrix(const AttributedGraph& g) {
  IntMatrix a(static_cast<std::size_t>(g.num_nodes));
  for (const Edge& e : g.edges) {
    a(static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v)) = 1;
    a(static_cast<std::size_t>(e.v), static_cast<std::size_t>(e.u)) = 1;
  }
  return a;
}

namespace {

IntMatrix checked_intmul(const IntMatrix& a, const IntMatrix& b, int power) {
  IntMatrix out(a.n);
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t k = 0; k < a.n; ++k) {
      const std::int64_t aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < a.n; ++j) {
        std::int64_t product = 0, sum = 0;
        if (__builtin_mul_overflow(aik, b(k, j), &product) ||
            __builtin_add_overflow(out(i, j), product, &sum))
          throw numeric_error("integer overflow computing adjacency power " +
                              std::to_string(power));
        out(i, j) = sum;
      }
    }
  }
  return out;
}

}  // namespace

AdjacencyPowers adjacency_powers(const AttributedGraph& g, int r) {
  if (r < 1) throw std::invalid_argument("adjacency_powers requires r >= 1");
  AdjacencyPowers result;
  result.r = r;
  result.powers.reserve(static_cast<std::size_t>(r));
  result.powers.push_back(adjacency_matrix(g));
  for (int k = 2; k <= r; ++k)
    result.powers.push_back(checked_intmul(result.powers.back(), result.powers.front(), k));
  return result;
}

Matrix normalized_laplacian(const AttributedGraph& g) {
  const auto n = static_cast<std::size_t>(g.num_nodes);
  IntMatrix a = adjacency_matrix(g);
  std::vector<double> inv_sqrt_degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t degree = 0;
    for (std::size_t j = 0; j < n; ++j) degree += a(i, j);
    if (degree > 0) inv_sqrt_degree[i] = 1.0 / std::sqrt(static_cast<double>(degree));
  }
  Matrix lap = Matrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a(i, j) != 0) lap(i, j) -= inv_sqrt_degree[i] * inv_sqrt_degree[j];
  return lap;
}

SpectralDecomposition symmetric_eigendecomposition(const Matrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("matrix not square");
  const std::size_t n = m.rows;
  double max_abs = 0.0;
  for (double x : m.data) max_abs = std::max(max_abs, std::abs(x));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(1.0, max_abs))
        throw std::invalid_argument("matrix not symmetric within 1e-12");

  Matrix a = m;
  Matrix vectors = Matrix::identity(n);
  double frob = 0.0;
  for (double x : a.data) frob += x * x;
  frob = std::sqrt(frob);
  const double threshold = 1e-12 * frob;

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  double residual = off_norm();
  while (residual > threshold && frob > 0.0) {
    if (sweep++ >= kMaxSweeps)
      throw numeric_error("Jacobi eigensolver did not converge after 100 sweeps, residual " +
                          std::to_string(residual));
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i != p && i != q) {
            const double aip = a(i, p), aiq = a(i, q);
            a(i, p) = aip - s * (aiq + tau * aip);
            a(p, i) = a(i, p);
            a(i, q) = aiq + s * (aip - tau * aiq);
            a(q, i) = a(i, q);
          }
          const double vip = vectors(i, p), viq = vectors(i, q);
          vectors(i, p) = vip - s * (viq + tau * vip);
          vectors(i, q) = viq + s * (vip - tau * viq);
        }
      }
    }
    residual = off_norm();
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t lhs, std::size_t rhs) { return a(lhs, lhs) < a(rhs, rhs); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = a(src, src);
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = vectors(i, src);
      if (std::abs(x) > 1e-12) {
        sign = x < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = sign * vectors(i, src);
  }
  return out;
}

}  // namespace rhop
