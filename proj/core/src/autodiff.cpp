#include "rhop/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rhop {

Var Tape::push(Matrix value, bool requires_grad, std::function<void(Tape&)> backprop) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

namespace {

void accumulate(Matrix& dst, const Matrix& src) {
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

}  // namespace

Var Tape::matmul(Var a, Var b) {
  const int aid = a.id, bid = b.id;
  Matrix out = rhop::matmul(val(aid), val(bid));
  Var result = push(std::move(out), needs(aid) || needs(bid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [aid, bid, self](Tape& t) {
    const Matrix& g = t.grad_ref(self);
    if (t.needs(aid)) {
      // dA += g * B^T
      const Matrix& bv = t.val(bid);
      Matrix& ga = t.grad_ref(aid);
      for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) {
          const double gij = g(i, j);
          if (gij == 0.0) continue;
          for (std::size_t k = 0; k < bv.rows; ++k) ga(i, k) += gij * bv(k, j);
        }
    }
    if (t.needs(bid)) {
      // dB += A^T * g
      const Matrix& av = t.val(aid);
      Matrix& gb = t.grad_ref(bid);
      for (std::size_t i = 0; i < av.rows; ++i)
        for (std::size_t k = 0; k < av.cols; ++k) {
          const double aik = av(i, k);
          if (aik == 0.0) continue;
          for (std::size_t j = 0; j < g.cols; ++j) gb(k, j) += aik * g(i, j);
        }
    }
  };
  return result;
}

Var Tape::add(Var a, Var b) {
  const int aid = a.id, bid = b.id;
  const Matrix& av = val(aid);
  const Matrix& bv = val(bid);
  if (av.rows != bv.rows || av.cols != bv.cols) throw std::invalid_argument("add shape mismatch");
  Matrix out = av;
  accumulate(out, bv);
  Var result = push(std::move(out), needs(aid) || needs(bid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [aid, bid, self](Tape& t) {
    const Matrix& g = t.grad_ref(self);
    if (t.needs(aid)) accumulate(t.grad_ref(aid), g);
    if (t.needs(bid)) accumulate(t.grad_ref(bid), g);
  };
  return result;
}

Var Tape::add_rowvec(Var a, Var row) {
  const int aid = a.id, rid = row.id;
  const Matrix& av = val(aid);
  const Matrix& rv = val(rid);
  if (rv.rows != 1 || rv.cols != av.cols) throw std::invalid_argument("add_rowvec shape mismatch");
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows; ++i)
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += rv(0, j);
  Var result = push(std::move(out), needs(aid) || needs(rid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [aid, rid, self](Tape& t) {
    const Matrix& g = t.grad_ref(self);
    if (t.needs(aid)) accumulate(t.grad_ref(aid), g);
    if (t.needs(rid)) {
      Matrix& gr = t.grad_ref(rid);
      for (std::size_t i = 0; i < g.rows; ++i)
        for (std::size_t j = 0; j < g.cols; ++j) gr(0, j) += g(i, j);
    }
  };
  return result;
}

Var Tape::mul_colvec(Var a, Var col) {
  const int aid = a.id, cid = col.id;
  const Matrix& av = val(aid);
  const Matrix& cv = val(cid);
  if (cv.cols != 1 || cv.rows != av.rows) throw std::invalid_argument("mul_colvec shape mismatch");
  Matrix out = av;
  for (std::size_t i = 0; i < out.rows; ++i) {
    const double w = cv(i, 0);
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) *= w;
  }
  Var result = push(std::move(out), needs(aid) || needs(cid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [aid, cid, self](Tape& t) {
    const Matrix& g = t.grad_ref(self);
    const Matrix& av2 = t.val(aid);
    const Matrix& cv2 = t.val(cid);
    if (t.needs(aid)) {
      Matrix& ga = t.grad_ref(aid);
      for (std::size_t i = 0; i < g.rows; ++i) {
        const double w = cv2(i, 0);
        for (std::size_t j = 0; j < g.cols; ++j) ga(i, j) += g(i, j) * w;
      }
    }
    if (t.needs(cid)) {
      Matrix& gc = t.grad_ref(cid);
      for (std::size_t i = 0; i < g.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < g.cols; ++j) s += g(i, j) * av2(i, j);
        gc(i, 0) += s;
      }
    }
  };
  return result;
}

Var Tape::relu(Var a) {
  const int aid = a.id;
  Matrix out = val(aid);
  for (double& x : out.data) x = x > 0.0 ? x : 0.0;
  Var result = push(std::move(out), needs(aid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [aid, self](Tape& t) {
    if (!t.needs(aid)) return;
    const Matrix& g = t.grad_ref(self);
    const Matrix& av = t.val(aid);
    Matrix& ga = t.grad_ref(aid);
    for (std::size_t i = 0; i < g.data.size(); ++i)
      if (av.data[i] > 0.0) ga.data[i] += g.data[i];
  };
  return result;
}

Var Tape::scale(Var a, double s) {
  const int aid = a.id;
  Matrix out = val(aid);
  for (double& x : out.data) x *= s;
  Var result = push(std::move(out), needs(aid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [aid, self, s](Tape& t) {
    if (!t.needs(aid)) return;
    const Matrix& g = t.grad_ref(self);
    Matrix& ga = t.grad_ref(aid);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += s * g.data[i];
  };
  return result;
}

Var Tape::gather_rows(Var a, std::vector<int> idx) {
  const int aid = a.id;
  const Matrix& av = val(aid);
  Matrix out(idx.size(), av.cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= av.rows)
      throw std::invalid_argument("gather_rows index out of range");
    for (std::size_t j = 0; j < av.cols; ++j) out(i, j) = av(static_cast<std::size_t>(idx[i]), j);
  }
  Var result = push(std::move(out), needs(aid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [aid, self, idx = std::move(idx)](Tape& t) {
    if (!t.needs(aid)) return;
    const Matrix& g = t.grad_ref(self);
    Matrix& ga = t.grad_ref(aid);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < g.cols; ++j)
        ga(static_cast<std::size_t>(idx[i]), j) += g(i, j);
  };
  return result;
}

Var Tape::row_dot(Var a, Var b) {
  const int aid = a.id, bid = b.id;
  const Matrix& av = val(aid);
  const Matrix& bv = val(bid);
  if (av.rows != bv.rows || av.cols != bv.cols)
    throw std::invalid_argument("row_dot shape mismatch");
  Matrix out(av.rows, 1);
  for (std::size_t i = 0; i < av.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < av.cols; ++j) s += av(i, j) * bv(i, j);
    out(i, 0) = s;
  }
  Var result = push(std::move(out), needs(aid) || needs(bid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [aid, bid, self](Tape& t) {
    const Matrix& g = t.grad_ref(self);
    const Matrix& av2 = t.val(aid);
    const Matrix& bv2 = t.val(bid);
    if (t.needs(aid)) {
      Matrix& ga = t.grad_ref(aid);
      for (std::size_t i = 0; i < av2.rows; ++i)
        for (std::size_t j = 0; j < av2.cols; ++j) ga(i, j) += g(i, 0) * bv2(i, j);
    }
    if (t.needs(bid)) {
      Matrix& gb = t.grad_ref(bid);
      for (std::size_t i = 0; i < av2.rows; ++i)
        for (std::size_t j = 0; j < av2.cols; ++j) gb(i, j) += g(i, 0) * av2(i, j);
    }
  };
  return result;
}

Var Tape::segment_softmax(Var logits, std::vector<int> segments, int num_segments) {
  const int lid = logits.id;
  const Matrix& lv = val(lid);
  if (lv.cols != 1) throw std::invalid_argument("segment_softmax expects an m x 1 column");
  if (segments.size() != lv.rows) throw std::invalid_argument("segment ids length mismatch");

  std::vector<double> seg_max(static_cast<std::size_t>(num_segments),
                              -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < segments.size(); ++i)
    seg_max[static_cast<std::size_t>(segments[i])] =
        std::max(seg_max[static_cast<std::size_t>(segments[i])], lv(i, 0));
  Matrix out(lv.rows, 1);
  std::vector<double> seg_sum(static_cast<std::size_t>(num_segments), 0.0);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out(i, 0) = std::exp(lv(i, 0) - seg_max[static_cast<std::size_t>(segments[i])]);
    seg_sum[static_cast<std::size_t>(segments[i])] += out(i, 0);
  }
  for (std::size_t i = 0; i < segments.size(); ++i)
    out(i, 0) /= seg_sum[static_cast<std::size_t>(segments[i])];

  Var result = push(std::move(out), needs(lid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [lid, self, segments = std::move(segments), num_segments](Tape& t) {
    if (!t.needs(lid)) return;
    const Matrix& g = t.grad_ref(self);
    const Matrix& y = t.val(self);
    Matrix& gl = t.grad_ref(lid);
    std::vector<double> seg_inner(static_cast<std::size_t>(num_segments), 0.0);
    for (std::size_t i = 0; i < segments.size(); ++i)
      seg_inner[static_cast<std::size_t>(segments[i])] += y(i, 0) * g(i, 0);
    for (std::size_t i = 0; i < segments.size(); ++i)
      gl(i, 0) += y(i, 0) * (g(i, 0) - seg_inner[static_cast<std::size_t>(segments[i])]);
  };
  return result;
}

Var Tape::segment_sum(Var rows, std::vector<int> segments, int num_segments) {
  const int rid = rows.id;
  const Matrix& rv = val(rid);
  if (segments.size() != rv.rows) throw std::invalid_argument("segment ids length mismatch");
  Matrix out(static_cast<std::size_t>(num_segments), rv.cols);
  for (std::size_t i = 0; i < rv.rows; ++i)
    for (std::size_t j = 0; j < rv.cols; ++j)
      out(static_cast<std::size_t>(segments[i]), j) += rv(i, j);
  Var result = push(std::move(out), needs(rid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [rid, self, segments = std::move(segments)](Tape& t) {
    if (!t.needs(rid)) return;
    const Matrix& g = t.grad_ref(self);
    Matrix& gr = t.grad_ref(rid);
    for (std::size_t i = 0; i < gr.rows; ++i)
      for (std::size_t j = 0; j < gr.cols; ++j)
        gr(i, j) += g(static_cast<std::size_t>(segments[i]), j);
  };
  return result;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols of nothing");
  std::size_t rows = val(parts.front().id).rows;
  std::size_t total_cols = 0;
  bool any_grad = false;
  std::vector<int> ids;
  for (Var p : parts) {
    const Matrix& pv = val(p.id);
    if (pv.rows != rows) throw std::invalid_argument("concat_cols row mismatch");
    total_cols += pv.cols;
    any_grad = any_grad || needs(p.id);
    ids.push_back(p.id);
  }
  Matrix out(rows, total_cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix& pv = val(p.id);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < pv.cols; ++j) out(i, offset + j) = pv(i, j);
    offset += pv.cols;
  }
  Var result = push(std::move(out), any_grad, nullptr);
  const int self = result.id;
  nodes_.back().backprop = [ids = std::move(ids), self](Tape& t) {
    const Matrix& g = t.grad_ref(self);
    std::size_t offset = 0;
    for (int id : ids) {
      const std::size_t cols = t.val(id).cols;
      if (t.needs(id)) {
        Matrix& gp = t.grad_ref(id);
        for (std::size_t i = 0; i < g.rows; ++i)
          for (std::size_t j = 0; j < cols; ++j) gp(i, j) += g(i, offset + j);
      }
      offset += cols;
    }
  };
  return result;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows of nothing");
  std::size_t cols = val(parts.front().id).cols;
  std::size_t total_rows = 0;
  bool any_grad = false;
  std::vector<int> ids;
  for (Var p : parts) {
    const Matrix& pv = val(p.id);
    if (pv.cols != cols) throw std::invalid_argument("concat_rows column mismatch");
    total_rows += pv.rows;
    any_grad = any_grad || needs(p.id);
    ids.push_back(p.id);
  }
  Matrix out(total_rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix& pv = val(p.id);
    for (std::size_t i = 0; i < pv.rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) out(offset + i, j) = pv(i, j);
    offset += pv.rows;
  }
  Var result = push(std::move(out), any_grad, nullptr);
  const int self = result.id;
  nodes_.back().backprop = [ids = std::move(ids), self](Tape& t) {
    const Matrix& g = t.grad_ref(self);
    std::size_t offset = 0;
    for (int id : ids) {
      const std::size_t rows = t.val(id).rows;
      if (t.needs(id)) {
        Matrix& gp = t.grad_ref(id);
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < g.cols; ++j) gp(i, j) += g(offset + i, j);
      }
      offset += rows;
    }
  };
  return result;
}

Var Tape::layer_norm(Var x, Var gamma, Var beta, double eps) {
  const int xid = x.id, gid = gamma.id, bid = beta.id;
  const Matrix& xv = val(xid);
  const Matrix& gv = val(gid);
  const Matrix& bv = val(bid);
  if (gv.rows != 1 || gv.cols != xv.cols || bv.rows != 1 || bv.cols != xv.cols)
    throw std::invalid_argument("layer_norm affine shape mismatch");
  const std::size_t n = xv.rows, c = xv.cols;
  Matrix out(n, c);
  Matrix xhat(n, c);
  std::vector<double> inv_std(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += xv(i, j);
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double d = xv(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(c);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) {
      xhat(i, j) = (xv(i, j) - mean) * inv_std[i];
      out(i, j) = xhat(i, j) * gv(0, j) + bv(0, j);
    }
  }
  Var result = push(std::move(out), needs(xid) || needs(gid) || needs(bid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [xid, gid, bid, self, xhat = std::move(xhat),
                            inv_std = std::move(inv_std)](Tape& t) {
    const Matrix& g = t.grad_ref(self);
    const Matrix& gv2 = t.val(gid);
    const std::size_t n = g.rows, c = g.cols;
    if (t.needs(gid) || t.needs(bid)) {
      for (std::size_t j = 0; j < c; ++j) {
        double dgamma = 0.0, dbeta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          dgamma += g(i, j) * xhat(i, j);
          dbeta += g(i, j);
        }
        if (t.needs(gid)) t.grad_ref(gid)(0, j) += dgamma;
        if (t.needs(bid)) t.grad_ref(bid)(0, j) += dbeta;
      }
    }
    if (t.needs(xid)) {
      Matrix& gx = t.grad_ref(xid);
      for (std::size_t i = 0; i < n; ++i) {
        double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
          const double dxhat = g(i, j) * gv2(0, j);
          mean_dxhat += dxhat;
          mean_dxhat_xhat += dxhat * xhat(i, j);
        }
        mean_dxhat /= static_cast<double>(c);
        mean_dxhat_xhat /= static_cast<double>(c);
        for (std::size_t j = 0; j < c; ++j) {
          const double dxhat = g(i, j) * gv2(0, j);
          gx(i, j) += inv_std[i] * (dxhat - mean_dxhat - xhat(i, j) * mean_dxhat_xhat);
        }
      }
    }
  };
  return result;
}

Var Tape::mean_rows(Var a) {
  const int aid = a.id;
  const Matrix& av = val(aid);
  if (av.rows == 0) throw std::invalid_argument("mean_rows of empty matrix");
  Matrix out(1, av.cols);
  for (std::size_t i = 0; i < av.rows; ++i)
    for (std::size_t j = 0; j < av.cols; ++j) out(0, j) += av(i, j);
  for (std::size_t j = 0; j < av.cols; ++j) out(0, j) /= static_cast<double>(av.rows);
  Var result = push(std::move(out), needs(aid), nullptr);
  const int self = result.id;
  const double inv = 1.0 / static_cast<double>(av.rows);
  nodes_.back().backprop = [aid, self, inv](Tape& t) {
    if (!t.needs(aid)) return;
    const Matrix& g = t.grad_ref(self);
    Matrix& ga = t.grad_ref(aid);
    for (std::size_t i = 0; i < ga.rows; ++i)
      for (std::size_t j = 0; j < ga.cols; ++j) ga(i, j) += g(0, j) * inv;
  };
  return result;
}

Var Tape::sum_rows(Var a) {
  const int aid = a.id;
  const Matrix& av = val(aid);
  Matrix out(1, av.cols);
  for (std::size_t i = 0; i < av.rows; ++i)
    for (std::size_t j = 0; j < av.cols; ++j) out(0, j) += av(i, j);
  Var result = push(std::move(out), needs(aid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [aid, self](Tape& t) {
    if (!t.needs(aid)) return;
    const Matrix& g = t.grad_ref(self);
    Matrix& ga = t.grad_ref(aid);
    for (std::size_t i = 0; i < ga.rows; ++i)
      for (std::size_t j = 0; j < ga.cols; ++j) ga(i, j) += g(0, j);
  };
  return result;
}

Var Tape::softmax_cross_entropy(Var logits, std::vector<std::int64_t> targets) {
  const int lid = logits.id;
  const Matrix& lv = val(lid);
  if (targets.size() != lv.rows)
    throw std::invalid_argument("cross-entropy target count mismatch");
  const std::size_t n = lv.rows, c = lv.cols;
  Matrix probs(n, c);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= c)
      throw std::invalid_argument("cross-entropy target class out of range");
    double row_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) row_max = std::max(row_max, lv(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      probs(i, j) = std::exp(lv(i, j) - row_max);
      sum += probs(i, j);
    }
    for (std::size_t j = 0; j < c; ++j) probs(i, j) /= sum;
    total += std::log(sum) + row_max - lv(i, static_cast<std::size_t>(targets[i]));
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(n);
  Var result = push(std::move(out), needs(lid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [lid, self, probs = std::move(probs),
                            targets = std::move(targets)](Tape& t) {
    if (!t.needs(lid)) return;
    const double g = t.grad_ref(self)(0, 0);
    Matrix& gl = t.grad_ref(lid);
    const double inv = 1.0 / static_cast<double>(probs.rows);
    for (std::size_t i = 0; i < probs.rows; ++i)
      for (std::size_t j = 0; j < probs.cols; ++j) {
        double delta = probs(i, j);
        if (static_cast<std::size_t>(targets[i]) == j) delta -= 1.0;
        gl(i, j) += g * delta * inv;
      }
  };
  return result;
}

Var Tape::l1_loss(Var pred, std::vector<double> targets) {
  const int pid = pred.id;
  const Matrix& pv = val(pid);
  if (targets.size() != pv.data.size()) throw std::invalid_argument("L1 target count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) total += std::abs(pv.data[i] - targets[i]);
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(targets.size());
  Var result = push(std::move(out), needs(pid), nullptr);
  const int self = result.id;
  nodes_.back().backprop = [pid, self, targets = std::move(targets)](Tape& t) {
    if (!t.needs(pid)) return;
    const double g = t.grad_ref(self)(0, 0);
    const Matrix& pv2 = t.val(pid);
    Matrix& gp = t.grad_ref(pid);
    const double inv = 1.0 / static_cast<double>(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const double diff = pv2.data[i] - targets[i];
      const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
      gp.data[i] += g * sign * inv;
    }
  };
  return result;
}

void Tape::backward(Var root) {
  Node& top = nodes_[static_cast<std::size_t>(root.id)];
  if (top.value.rows != 1 || top.value.cols != 1)
    throw std::invalid_argument("backward root must be a 1x1 scalar");
  for (Node& node : nodes_)
    if (node.requires_grad) node.grad = Matrix(node.value.rows, node.value.cols);
  if (!top.requires_grad) return;
  top.grad(0, 0) = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.requires_grad && node.backprop) node.backprop(*this);
  }
}

}  // namespace rhop
