#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rhop/linalg.hpp"

namespace rhop {

/// Handle to a tape node.
struct Var {
  int id = -1;
};

/// Reverse-mode tape over dense matrices. Operations append nodes in
/// topological order; backward() replays them in reverse. All ops are
/// deterministic (fixed iteration order, no RNG).
class Tape {
 public:
  /// Leaf node. Parameters pass requires_grad = true.
  Var leaf(Matrix value, bool requires_grad = false);

  const Matrix& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  const Matrix& grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].grad; }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  /// rows (n x c) + broadcast row (1 x c).
  Var add_rowvec(Var a, Var row);
  /// rows (n x c) scaled per-row by a column (n x 1).
  Var mul_colvec(Var a, Var col);
  Var relu(Var a);
  Var scale(Var a, double s);
  /// Row gather; out row i = a row idx[i]. Backward scatter-adds.
  Var gather_rows(Var a, std::vector<int> idx);
  /// Row-wise dot product of equally-shaped matrices -> (n x 1).
  Var row_dot(Var a, Var b);
  /// Softmax of logits (m x 1) within each segment (max-stabilized).
  Var segment_softmax(Var logits, std::vector<int> segments, int num_segments);
  /// Sums rows (m x c) into (num_segments x c) by segment id.
  Var segment_sum(Var rows, std::vector<int> segments, int num_segments);
  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  /// Per-row feature normalization with learned affine (gamma, beta: 1 x c).
  Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
  Var mean_rows(Var a);
  Var sum_rows(Var a);
  /// Mean softmax cross-entropy over rows -> (1 x 1).
  Var softmax_cross_entropy(Var logits, std::vector<std::int64_t> targets);
  /// Mean absolute error against targets -> (1 x 1).
  Var l1_loss(Var pred, std::vector<double> targets);

  /// Accumulates gradients of a scalar (1 x 1) node into every
  /// requires-grad node.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backprop;
  };

  Var push(Matrix value, bool requires_grad, std::function<void(Tape&)> backprop);
  Matrix& grad_ref(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  const Matrix& val(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool needs(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

  std::vector<Node> nodes_;
};

}  // namespace rhop
