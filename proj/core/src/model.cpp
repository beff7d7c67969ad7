#include "rhop/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rhop/errors.hpp"
#include "rhop/rng.hpp"

namespace rhop {

PeInput pe_input_from(PeKind kind) {
  switch (kind) {
    case PeKind::shortest: return PeInput::shortest;
    case PeKind::adjacency: return PeInput::adjacency;
    case PeKind::spectral: return PeInput::spectral;
  }
  throw std::invalid_argument("unknown PE kind");
}

std::string to_string(PeInput pe) {
  switch (pe) {
    case PeInput::none: return "none";
    case PeInput::shortest: return "short";
    case PeInput::adjacency: return "adj";
    case PeInput::spectral: return "lp";
  }
  throw std::invalid_argument("unknown PE input");
}

std::string to_string(Readout readout) {
  switch (readout) {
    case Readout::mean_pool: return "mean";
    case Readout::sum_pool: return "sum";
    case Readout::cls_feature: return "cls";
    case Readout::per_node: return "per-node";
  }
  throw std::invalid_argument("unknown readout");
}

namespace {

Matrix glorot(SplitMix64& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& x : m.data) x = rng.uniform(-a, a);
  return m;
}

Matrix embedding_init(SplitMix64& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  const double a = 1.0 / std::sqrt(static_cast<double>(cols));
  for (double& x : m.data) x = rng.uniform(-a, a);
  return m;
}

Matrix ones_row(std::size_t cols) {
  Matrix m(1, cols);
  for (double& x : m.data) x = 1.0;
  return m;
}

}  // namespace

ToyModel make_model(const ModelConfig& config) {
  if (config.hidden_dim < 1 || config.heads < 1 || config.hidden_dim % config.heads != 0)
    throw std::invalid_argument("hidden_dim must be a positive multiple of heads");
  if (config.layers < 1) throw std::invalid_argument("layers must be >= 1");
  if (config.pe_length < 1) throw std::invalid_argument("pe_length must be >= 1");
  if (config.outputs < 1) throw std::invalid_argument("outputs must be >= 1");

  const auto d = static_cast<std::size_t>(config.hidden_dim);
  const auto dh = d / static_cast<std::size_t>(config.heads);
  const auto f = d;  // FFN hidden width
  SplitMix64 rng(config.seed);

  ToyModel model;
  model.config = config;
  model.node_embed_w = glorot(rng, static_cast<std::size_t>(config.node_feature_dim), d);
  model.node_embed_b = Matrix(1, d);
  model.edge_embed_w = glorot(rng, static_cast<std::size_t>(config.edge_feature_dim), d);
  model.edge_embed_b = Matrix(1, d);
  model.shortest_table = embedding_init(rng, static_cast<std::size_t>(config.pe_length) + 1, d);
  model.adjacency_embed_w = glorot(rng, static_cast<std::size_t>(config.pe_length), d);
  model.spectral_embed_w = glorot(rng, static_cast<std::size_t>(config.pe_length), d);
  model.self_edge_embed = embedding_init(rng, 1, d);

  model.layers.resize(static_cast<std::size_t>(config.layers));
  for (LayerWeights& layer : model.layers) {
    for (int k = 0; k < config.heads; ++k) {
      layer.attn_query.push_back(glorot(rng, d, dh));
      layer.attn_key.push_back(glorot(rng, d, dh));
      layer.attn_value.push_back(glorot(rng, d, dh));
      layer.attn_edge.push_back(glorot(rng, d, 1));
      layer.attn_edge_value.push_back(glorot(rng, d, dh));
    }
    layer.norm1_gamma = ones_row(d);
    layer.norm1_beta = Matrix(1, d);
    layer.norm2_gamma = ones_row(d);
    layer.norm2_beta = Matrix(1, d);
    layer.ffn_w1 = glorot(rng, d, f);
    layer.ffn_b1 = Matrix(1, f);
    layer.ffn_w2 = glorot(rng, f, d);
    layer.ffn_b2 = Matrix(1, d);
    layer.edge_norm_gamma = ones_row(d);
    layer.edge_norm_beta = Matrix(1, d);
    layer.edge_ffn_w1 = glorot(rng, d, f);
    layer.edge_ffn_b1 = Matrix(1, f);
    layer.edge_ffn_w2 = glorot(rng, f, d);
    layer.edge_ffn_b2 = Matrix(1, d);
  }

  model.readout_w1 = glorot(rng, d, f);
  model.readout_b1 = Matrix(1, f);
  model.readout_w2 = glorot(rng, f, static_cast<std::size_t>(config.outputs));
  model.readout_b2 = Matrix(1, static_cast<std::size_t>(config.outputs));
  return model;
}

namespace {

template <typename ModelT, typename MatrixT>
std::vector<std::pair<std::string, MatrixT*>> collect_params(ModelT& model) {
  std::vector<std::pair<std::string, MatrixT*>> out;
  out.emplace_back("node_embed_w", &model.node_embed_w);
  out.emplace_back("node_embed_b", &model.node_embed_b);
  out.emplace_back("edge_embed_w", &model.edge_embed_w);
  out.emplace_back("edge_embed_b", &model.edge_embed_b);
  out.emplace_back("shortest_table", &model.shortest_table);
  out.emplace_back("adjacency_embed_w", &model.adjacency_embed_w);
  out.emplace_back("spectral_embed_w", &model.spectral_embed_w);
  out.emplace_back("self_edge_embed", &model.self_edge_embed);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& layer = model.layers[l];
    const std::string prefix = "layer" + std::to_string(l) + ".";
    for (std::size_t k = 0; k < layer.attn_query.size(); ++k) {
      const std::string head = std::to_string(k);
      out.emplace_back(prefix + "attn_query" + head, &layer.attn_query[k]);
      out.emplace_back(prefix + "attn_key" + head, &layer.attn_key[k]);
      out.emplace_back(prefix + "attn_value" + head, &layer.attn_value[k]);
      out.emplace_back(prefix + "attn_edge" + head, &layer.attn_edge[k]);
      out.emplace_back(prefix + "attn_edge_value" + head, &layer.attn_edge_value[k]);
    }
    out.emplace_back(prefix + "norm1_gamma", &layer.norm1_gamma);
    out.emplace_back(prefix + "norm1_beta", &layer.norm1_beta);
    out.emplace_back(prefix + "norm2_gamma", &layer.norm2_gamma);
    out.emplace_back(prefix + "norm2_beta", &layer.norm2_beta);
    out.emplace_back(prefix + "ffn_w1", &layer.ffn_w1);
    out.emplace_back(prefix + "ffn_b1", &layer.ffn_b1);
    out.emplace_back(prefix + "ffn_w2", &layer.ffn_w2);
    out.emplace_back(prefix + "ffn_b2", &layer.ffn_b2);
    out.emplace_back(prefix + "edge_norm_gamma", &layer.edge_norm_gamma);
    out.emplace_back(prefix + "edge_norm_beta", &layer.edge_norm_beta);
    out.emplace_back(prefix + "edge_ffn_w1", &layer.edge_ffn_w1);
    out.emplace_back(prefix + "edge_ffn_b1", &layer.edge_ffn_b1);
    out.emplace_back(prefix + "edge_ffn_w2", &layer.edge_ffn_w2);
    out.emplace_back(prefix + "edge_ffn_b2", &layer.edge_ffn_b2);
  }
  out.emplace_back("readout_w1", &model.readout_w1);
  out.emplace_back("readout_b1", &model.readout_b1);
  out.emplace_back("readout_w2", &model.readout_w2);
  out.emplace_back("readout_b2", &model.readout_b2);
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Matrix*>> ToyModel::named_params() {
  return collect_params<ToyModel, Matrix>(*this);
}

std::vector<std::pair<std::string, const Matrix*>> ToyModel::named_params() const {
  return collect_params<const ToyModel, const Matrix>(*this);
}

namespace {

struct BuiltModel {
  std::vector<Var> params;  // aligned with named_params()
  Var node_states;
  Var readout;
};

void check_finite(const Matrix& m, const std::string& where) {
  for (double x : m.data)
    if (!std::isfinite(x)) throw numeric_error("non-finite activations at " + where);
}

Matrix feature_matrix(const std::vector<FeatureVec>& rows, std::size_t count, std::size_t dim) {
  Matrix m(count, dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = rows[i][j];
  return m;
}

/// Builds the whole computation graph on the tape; parameters become
/// requires-grad leaves in named_params() order.
BuiltModel build(Tape& tape, const ToyModel& model, const EncodedGraph& g) {
  const ModelConfig& config = model.config;
  const AttributedGraph& graph = g.rewired.graph;
  const int n = graph.num_nodes;
  if (n < 1) throw std::invalid_argument("forward requires at least one node");
  const std::size_t num_edges = graph.edges.size();
  const int d = config.hidden_dim;

  if (graph.node_feature_dim() != config.node_feature_dim)
    throw std::invalid_argument("node feature dimension mismatch");
  if (graph.edge_feature_dim() != config.edge_feature_dim)
    throw std::invalid_argument("edge feature dimension mismatch");

  switch (config.pe) {
    case PeInput::none:
      break;
    case PeInput::shortest:
      if (!g.edge_pe || g.edge_pe->kind != PeKind::shortest)
        throw std::invalid_argument("model expects shortest-path PE");
      break;
    case PeInput::adjacency:
      if (!g.edge_pe || g.edge_pe->kind != PeKind::adjacency)
        throw std::invalid_argument("model expects adjacency-powers PE");
      if (g.edge_pe->r != config.pe_length)
        throw std::invalid_argument("adjacency PE length mismatch");
      break;
    case PeInput::spectral:
      if (!g.node_pe) throw std::invalid_argument("model expects spectral PE");
      if (g.node_pe->q != config.pe_length)
        throw std::invalid_argument("spectral PE length mismatch");
      break;
  }

  BuiltModel built;
  auto named = model.named_params();
  built.params.reserve(named.size());
  for (auto& [name, matrix] : named) built.params.push_back(tape.leaf(*matrix, true));

  // Parameter vars by position; keep in sync with collect_params() order.
  std::size_t cursor = 0;
  auto next_param = [&]() { return built.params[cursor++]; };
  const Var node_embed_w = next_param();
  const Var node_embed_b = next_param();
  const Var edge_embed_w = next_param();
  const Var edge_embed_b = next_param();
  const Var shortest_table = next_param();
  const Var adjacency_embed_w = next_param();
  const Var spectral_embed_w = next_param();
  const Var self_edge_embed = next_param();
  struct LayerVars {
    std::vector<Var> q, k, v, c, u;
    Var n1g, n1b, n2g, n2b, fw1, fb1, fw2, fb2, eng, enb, ew1, eb1, ew2, eb2;
  };
  std::vector<LayerVars> layer_vars(static_cast<std::size_t>(config.layers));
  for (auto& lv : layer_vars) {
    for (int k = 0; k < config.heads; ++k) {
      lv.q.push_back(next_param());
      lv.k.push_back(next_param());
      lv.v.push_back(next_param());
      lv.c.push_back(next_param());
      lv.u.push_back(next_param());
    }
    lv.n1g = next_param();
    lv.n1b = next_param();
    lv.n2g = next_param();
    lv.n2b = next_param();
    lv.fw1 = next_param();
    lv.fb1 = next_param();
    lv.fw2 = next_param();
    lv.fb2 = next_param();
    lv.eng = next_param();
    lv.enb = next_param();
    lv.ew1 = next_param();
    lv.eb1 = next_param();
    lv.ew2 = next_param();
    lv.eb2 = next_param();
  }
  const Var readout_w1 = next_param();
  const Var readout_b1 = next_param();
  const Var readout_w2 = next_param();
  const Var readout_b2 = next_param();

  const std::vector<int> all_nodes_zero(static_cast<std::size_t>(n), 0);

  // Input layer: embed node features (plus spectral PE) into h^0.
  Var h;
  if (config.node_feature_dim > 0) {
    Var x = tape.leaf(feature_matrix(graph.node_features, static_cast<std::size_t>(n),
                                     static_cast<std::size_t>(config.node_feature_dim)));
    h = tape.add_rowvec(tape.matmul(x, node_embed_w), node_embed_b);
  } else {
    h = tape.gather_rows(node_embed_b, all_nodes_zero);
  }
  if (config.pe == PeInput::spectral) {
    Matrix pe(static_cast<std::size_t>(n), static_cast<std::size_t>(config.pe_length));
    for (int i = 0; i < n; ++i) {
      const auto& row = g.node_pe->values[static_cast<std::size_t>(i)];
      for (int j = 0; j < config.pe_length; ++j)
        pe(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
            row[static_cast<std::size_t>(j)];
    }
    h = tape.add(h, tape.matmul(tape.leaf(std::move(pe)), spectral_embed_w));
  }

  // Edge states: one row per directed edge, then one self-attention row per
  // node (a shared learned embedding).
  Var e_real;
  if (config.edge_feature_dim > 0) {
    Var x = tape.leaf(feature_matrix(graph.edge_features, num_edges,
                                     static_cast<std::size_t>(config.edge_feature_dim)));
    e_real = tape.add_rowvec(tape.matmul(x, edge_embed_w), edge_embed_b);
  } else {
    e_real = tape.gather_rows(edge_embed_b, std::vector<int>(num_edges, 0));
  }
  if (config.pe == PeInput::shortest) {
    std::vector<int> indices(num_edges);
    for (std::size_t i = 0; i < num_edges; ++i) {
      const std::int64_t value = g.edge_pe->values[i].at(0);
      if (value < 0 || value > config.pe_length)
        throw std::invalid_argument("shortest-path PE value out of lookup range");
      indices[i] = static_cast<int>(value);
    }
    e_real = tape.add(e_real, tape.gather_rows(shortest_table, std::move(indices)));
  } else if (config.pe == PeInput::adjacency) {
    Matrix pe(num_edges, static_cast<std::size_t>(config.pe_length));
    for (std::size_t i = 0; i < num_edges; ++i)
      for (int j = 0; j < config.pe_length; ++j)
        pe(i, static_cast<std::size_t>(j)) =
            static_cast<double>(g.edge_pe->values[i][static_cast<std::size_t>(j)]);
    e_real = tape.add(e_real, tape.matmul(tape.leaf(std::move(pe)), adjacency_embed_w));
  }
  Var e = tape.concat_rows({e_real, tape.gather_rows(self_edge_embed, all_nodes_zero)});

  // Attention slots: every directed edge (i, j) lets i attend to j with that
  // edge's state; the trailing n slots are the self terms.
  std::vector<int> centers, neighbors;
  centers.reserve(num_edges + static_cast<std::size_t>(n));
  neighbors.reserve(num_edges + static_cast<std::size_t>(n));
  for (const Edge& edge : graph.edges) {
    centers.push_back(edge.u);
    neighbors.push_back(edge.v);
  }
  for (int i = 0; i < n; ++i) {
    centers.push_back(i);
    neighbors.push_back(i);
  }

  auto ffn = [&](Var x, Var w1, Var b1, Var w2, Var b2) {
    return tape.add_rowvec(tape.matmul(tape.relu(tape.add_rowvec(tape.matmul(x, w1), b1)), w2),
                           b2);
  };

  for (int l = 0; l < config.layers; ++l) {
    const LayerVars& lv = layer_vars[static_cast<std::size_t>(l)];
    const bool pre = config.norm == NormPlacement::pre;
    const Var hn = pre ? tape.layer_norm(h, lv.n1g, lv.n1b) : h;
    const Var en = pre ? tape.layer_norm(e, lv.eng, lv.enb) : e;

    std::vector<Var> head_outputs;
    head_outputs.reserve(static_cast<std::size_t>(config.heads));
    for (int k = 0; k < config.heads; ++k) {
      const Var query = tape.gather_rows(tape.matmul(hn, lv.q[static_cast<std::size_t>(k)]), centers);
      const Var key = tape.gather_rows(tape.matmul(hn, lv.k[static_cast<std::size_t>(k)]), neighbors);
      const Var edge_term = tape.matmul(en, lv.c[static_cast<std::size_t>(k)]);
      const Var logits =
          tape.scale(tape.add(tape.row_dot(query, key), edge_term), 1.0 / static_cast<double>(d));
      const Var attention = tape.segment_softmax(logits, centers, n);
      const Var messages = tape.add(
          tape.gather_rows(tape.matmul(hn, lv.v[static_cast<std::size_t>(k)]), neighbors),
          tape.matmul(en, lv.u[static_cast<std::size_t>(k)]));
      head_outputs.push_back(
          tape.segment_sum(tape.mul_colvec(messages, attention), centers, n));
    }
    const Var attn_out = tape.concat_cols(head_outputs);

    if (pre) {
      const Var h_mid = tape.add(attn_out, h);
      const Var h_norm = tape.layer_norm(h_mid, lv.n2g, lv.n2b);
      h = tape.add(ffn(h_norm, lv.fw1, lv.fb1, lv.fw2, lv.fb2), h_mid);
      e = tape.add(ffn(en, lv.ew1, lv.eb1, lv.ew2, lv.eb2), e);
    } else {
      const Var h_mid = tape.layer_norm(tape.add(attn_out, h), lv.n1g, lv.n1b);
      h = tape.layer_norm(tape.add(ffn(h_mid, lv.fw1, lv.fb1, lv.fw2, lv.fb2), h_mid), lv.n2g,
                          lv.n2b);
      e = tape.layer_norm(tape.add(ffn(e, lv.ew1, lv.eb1, lv.ew2, lv.eb2), e), lv.eng, lv.enb);
    }
    check_finite(tape.value(h), "layer " + std::to_string(l));
  }

  built.node_states = h;

  Var pooled;
  switch (config.readout) {
    case Readout::mean_pool: pooled = tape.mean_rows(h); break;
    case Readout::sum_pool: pooled = tape.sum_rows(h); break;
    case Readout::cls_feature: {
      if (!g.rewired.cls_node)
        throw std::invalid_argument("cls_feature readout requires a CLS node");
      pooled = tape.gather_rows(h, {*g.rewired.cls_node});
      break;
    }
    case Readout::per_node: pooled = h; break;
  }
  built.readout = ffn(pooled, readout_w1, readout_b1, readout_w2, readout_b2);
  check_finite(tape.value(built.readout), "readout");
  return built;
}

Var build_loss(Tape& tape, Var readout, const Target& target, TaskKind task) {
  switch (task) {
    case TaskKind::multiclass: {
      if (!target.class_id) throw std::invalid_argument("multiclass loss requires a class target");
      Var logits = tape.value(readout).rows > 1 ? tape.gather_rows(readout, {0}) : readout;
      return tape.softmax_cross_entropy(logits, {*target.class_id});
    }
    case TaskKind::per_node_multiclass: {
      if (!target.node_classes)
        throw std::invalid_argument("per-node loss requires node class targets");
      std::vector<int> rows;
      std::vector<std::int64_t> classes;
      for (std::size_t i = 0; i < target.node_classes->size(); ++i) {
        if ((*target.node_classes)[i] >= 0) {
          rows.push_back(static_cast<int>(i));
          classes.push_back((*target.node_classes)[i]);
        }
      }
      if (classes.empty()) throw std::invalid_argument("no labeled nodes for per-node loss");
      return tape.softmax_cross_entropy(tape.gather_rows(readout, std::move(rows)),
                                        std::move(classes));
    }
    case TaskKind::regression: {
      if (!target.value) throw std::invalid_argument("regression loss requires a value target");
      return tape.l1_loss(readout, {*target.value});
    }
  }
  throw std::invalid_argument("unknown task kind");
}

}  // namespace

ForwardResult forward(const ToyModel& model, const EncodedGraph& g) {
  Tape tape;
  BuiltModel built = build(tape, model, g);
  ForwardResult result;
  result.node_states = tape.value(built.node_states);
  result.readout = tape.value(built.readout);
  return result;
}

Target target_from_graph(const AttributedGraph& g, TaskKind task) {
  Target target;
  switch (task) {
    case TaskKind::multiclass: {
      if (!g.graph_label || !std::holds_alternative<std::int64_t>(*g.graph_label))
        throw std::invalid_argument("graph lacks an integer class label");
      target.class_id = std::get<std::int64_t>(*g.graph_label);
      break;
    }
    case TaskKind::regression: {
      if (!g.graph_label) throw std::invalid_argument("graph lacks a label");
      target.value = std::holds_alternative<double>(*g.graph_label)
                         ? std::get<double>(*g.graph_label)
                         : static_cast<double>(std::get<std::int64_t>(*g.graph_label));
      break;
    }
    case TaskKind::per_node_multiclass: {
      if (!g.node_labels) throw std::invalid_argument("graph lacks node labels");
      target.node_classes = *g.node_labels;
      break;
    }
  }
  return target;
}

double loss_value(const Matrix& readout, const Target& target, TaskKind task) {
  Tape tape;
  Var r = tape.leaf(readout);
  Var loss = build_loss(tape, r, target, task);
  return tape.value(loss)(0, 0);
}

namespace {

std::size_t argmax_row(const Matrix& m, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < m.cols; ++j)
    if (m(row, j) > m(row, best)) best = j;
  return best;
}

}  // namespace

double accuracy_value(const Matrix& readout, const Target& target, TaskKind task) {
  switch (task) {
    case TaskKind::multiclass:
      return argmax_row(readout, 0) == static_cast<std::size_t>(*target.class_id) ? 1.0 : 0.0;
    case TaskKind::per_node_multiclass: {
      std::size_t correct = 0, counted = 0;
      for (std::size_t i = 0; i < target.node_classes->size(); ++i) {
        const std::int64_t label = (*target.node_classes)[i];
        if (label < 0) continue;
        ++counted;
        if (argmax_row(readout, i) == static_cast<std::size_t>(label)) ++correct;
      }
      return counted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(counted);
    }
    case TaskKind::regression: return std::numeric_limits<double>::quiet_NaN();
  }
  throw std::invalid_argument("unknown task kind");
}

Gradients backward(const ToyModel& model, const EncodedGraph& g, const Target& target) {
  Tape tape;
  BuiltModel built = build(tape, model, g);
  Var loss = build_loss(tape, built.readout, target, model.config.task);
  const double loss_val = tape.value(loss)(0, 0);
  if (!std::isfinite(loss_val)) throw numeric_error("non-finite loss");
  tape.backward(loss);

  Gradients grads;
  grads.loss = loss_val;
  grads.readout = tape.value(built.readout);
  grads.by_param.reserve(built.params.size());
  for (Var p : built.params) grads.by_param.push_back(tape.grad(p));
  for (std::size_t i = 0; i < grads.by_param.size(); ++i)
    for (double x : grads.by_param[i].data)
      if (!std::isfinite(x))
        throw numeric_error("non-finite gradient for parameter '" +
                            model.named_params()[i].first + "'");
  return grads;
}

}  // namespace rhop
