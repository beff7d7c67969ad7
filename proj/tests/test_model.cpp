#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rhop/encode.hpp"
#include "rhop/generate.hpp"
#include "rhop/model.hpp"
#include "rhop/rng.hpp"

using namespace rhop;

namespace {

EncodedGraph encoded_instance(PeInput pe, int* pe_length, std::uint64_t seed = 606) {
  auto g = gen_erdos(6, 0.5, seed);
  g.graph_label = GraphLabel{std::int64_t{1}};
  const auto rw = expand_receptive_field(g, 2);
  switch (pe) {
    case PeInput::none: {
      EncodedGraph plain;
      plain.rewired = rw;
      *pe_length = 1;
      return plain;
    }
    case PeInput::shortest:
      *pe_length = 2;
      return encode_shortest_path(rw);
    case PeInput::adjacency:
      *pe_length = 2;
      return encode_adjacency_powers(rw);
    case PeInput::spectral:
      *pe_length = 3;
      return encode_spectral(rw, 3);
  }
  throw std::logic_error("unreachable");
}

ModelConfig small_config(PeInput pe, int pe_length, NormPlacement norm = NormPlacement::pre) {
  ModelConfig config;
  config.hidden_dim = 8;
  config.heads = 2;
  config.layers = 2;
  config.readout = Readout::mean_pool;
  config.norm = norm;
  config.seed = 99;
  config.node_feature_dim = 1;
  config.edge_feature_dim = 0;
  config.pe = pe;
  config.pe_length = pe_length;
  config.outputs = 3;
  config.task = TaskKind::multiclass;
  return config;
}

void zero(Matrix& m) {
  for (double& x : m.data) x = 0.0;
}

/// Moves every parameter to a generic point. Zero-initialized biases leave
/// ReLU preactivations exactly at the kink, where central differences do not
/// measure the subgradient autodiff reports.
void randomize_params(ToyModel& model, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (auto& [name, matrix] : model.named_params())
    for (double& x : matrix->data) x += rng.uniform(-0.3, 0.3);
}

/// Max relative mismatch between analytic and central-difference gradients.
double gradcheck(ToyModel& model, const EncodedGraph& g, const Target& target,
                 double eps = 1e-4) {
  const Gradients analytic = backward(model, g, target);
  auto params = model.named_params();
  double worst = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& weights = *params[p].second;
    for (std::size_t i = 0; i < weights.data.size(); ++i) {
      const double saved = weights.data[i];
      weights.data[i] = saved + eps;
      const double fp = loss_value(forward(model, g).readout, target, model.config.task);
      weights.data[i] = saved - eps;
      const double fm = loss_value(forward(model, g).readout, target, model.config.task);
      weights.data[i] = saved;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic.by_param[p].data[i];
      const double err =
          std::abs(a - numeric) / std::max({1e-4, std::abs(a), std::abs(numeric)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("single isolated node: self-attention pipeline matches hand computation") {
  AttributedGraph g;
  g.num_nodes = 1;
  g.node_features = {{2.0}};
  EncodedGraph input;
  input.rewired = identity_rewiring(g);

  ModelConfig config = small_config(PeInput::none, 1);
  config.layers = 1;
  config.heads = 1;
  config.readout = Readout::per_node;
  const ToyModel model = make_model(config);
  const ForwardResult out = forward(model, input);

  const int d = config.hidden_dim;
  // Reproduce the pipeline directly: softmax over {i} is weight 1 on self.
  auto affine = [&](const std::vector<double>& x, const Matrix& w, const Matrix& b) {
    std::vector<double> y(w.cols, 0.0);
    for (std::size_t j = 0; j < w.cols; ++j) {
      for (std::size_t i = 0; i < w.rows; ++i) y[j] += x[i] * w(i, j);
      y[j] += b(0, j);
    }
    return y;
  };
  auto layer_norm_vec = [&](const std::vector<double>& x, const Matrix& gamma,
                            const Matrix& beta) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      y[i] = (x[i] - mean) * inv * gamma(0, i) + beta(0, i);
    return y;
  };
  auto ffn = [&](const std::vector<double>& x, const Matrix& w1, const Matrix& b1,
                 const Matrix& w2, const Matrix& b2) {
    auto hmid = affine(x, w1, b1);
    for (double& v : hmid) v = v > 0.0 ? v : 0.0;
    return affine(hmid, w2, b2);
  };

  std::vector<double> h(model.node_embed_b.cols);
  for (int j = 0; j < d; ++j)
    h[j] = 2.0 * model.node_embed_w(0, j) + model.node_embed_b(0, j);
  const LayerWeights& lw = model.layers[0];
  const auto hn = layer_norm_vec(h, lw.norm1_gamma, lw.norm1_beta);
  // The only attention slot is the self edge; its weight is 1 and its message
  // is W hn + U en where en is the normalized self-edge state.
  std::vector<double> self_edge(d);
  for (int j = 0; j < d; ++j) self_edge[j] = model.self_edge_embed(0, j);
  const auto en = layer_norm_vec(self_edge, lw.edge_norm_gamma, lw.edge_norm_beta);
  std::vector<double> attn(d, 0.0);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i)
      attn[j] += hn[i] * lw.attn_value[0](i, j) + en[i] * lw.attn_edge_value[0](i, j);
  }
  std::vector<double> h_mid(d);
  for (int j = 0; j < d; ++j) h_mid[j] = attn[j] + h[j];
  const auto h_out_ffn =
      ffn(layer_norm_vec(h_mid, lw.norm2_gamma, lw.norm2_beta), lw.ffn_w1, lw.ffn_b1, lw.ffn_w2,
          lw.ffn_b2);
  std::vector<double> h1(d);
  for (int j = 0; j < d; ++j) h1[j] = h_out_ffn[j] + h_mid[j];
  const auto logits =
      ffn(h1, model.readout_w1, model.readout_b1, model.readout_w2, model.readout_b2);

  for (int j = 0; j < d; ++j)
    CHECK(out.node_states(0, j) == doctest::Approx(h1[j]).epsilon(1e-12));
  for (std::size_t j = 0; j < logits.size(); ++j)
    CHECK(out.readout(0, j) == doctest::Approx(logits[j]).epsilon(1e-12));
}

TEST_CASE("uniform attention averages neighbor states") {
  int pe_length = 1;
  const auto input = encoded_instance(PeInput::none, &pe_length, 42);
  ModelConfig config = small_config(PeInput::none, 1);
  config.heads = 1;
  config.layers = 1;
  ToyModel model = make_model(config);
  const int d = config.hidden_dim;

  // Zero logits make attention uniform over N_i and self; an identity value
  // projection exposes the plain average of normalized states.
  LayerWeights& lw = model.layers[0];
  zero(lw.attn_query[0]);
  zero(lw.attn_key[0]);
  zero(lw.attn_edge[0]);
  zero(lw.attn_edge_value[0]);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) lw.attn_value[0](i, j) = i == j ? 1.0 : 0.0;
  zero(lw.ffn_w1);
  zero(lw.ffn_b1);
  zero(lw.ffn_w2);
  zero(lw.ffn_b2);

  const ForwardResult out = forward(model, input);

  // Independent computation of h0 and the neighbor average.
  const auto& g = input.rewired.graph;
  const int n = g.num_nodes;
  std::vector<std::vector<double>> h0(n, std::vector<double>(d));
  for (int v = 0; v < n; ++v)
    for (int j = 0; j < d; ++j)
      h0[v][j] = g.node_features[v][0] * model.node_embed_w(0, j) + model.node_embed_b(0, j);
  auto normed = h0;
  for (int v = 0; v < n; ++v) {
    double mean = 0.0, var = 0.0;
    for (double x : h0[v]) mean += x;
    mean /= d;
    for (double x : h0[v]) var += (x - mean) * (x - mean);
    var /= d;
    for (int j = 0; j < d; ++j)
      normed[v][j] = (h0[v][j] - mean) / std::sqrt(var + 1e-5) *
                         model.layers[0].norm1_gamma(0, j) +
                     model.layers[0].norm1_beta(0, j);
  }
  for (int v = 0; v < n; ++v) {
    std::vector<int> neighborhood{v};
    for (const Edge& e : g.edges)
      if (e.u == v) neighborhood.push_back(e.v);
    std::vector<double> avg(d, 0.0);
    for (int u : neighborhood)
      for (int j = 0; j < d; ++j) avg[j] += normed[u][j];
    for (int j = 0; j < d; ++j) {
      avg[j] /= static_cast<double>(neighborhood.size());
      CHECK(out.node_states(v, j) == doctest::Approx(avg[j] + h0[v][j]).epsilon(1e-9));
    }
  }
}

TEST_CASE("permutation equivariance and readout invariance") {
  for (PeInput pe : {PeInput::shortest, PeInput::adjacency, PeInput::spectral}) {
    int pe_length = 1;
    const auto input = encoded_instance(pe, &pe_length);
    ModelConfig config = small_config(pe, pe_length);
    const ToyModel model = make_model(config);

    // Relabel nodes by a fixed permutation.
    const std::vector<int> perm = {3, 0, 5, 1, 4, 2};
    EncodedGraph permuted = input;
    auto& pg = permuted.rewired.graph;
    const auto& og = input.rewired.graph;
    for (std::size_t e = 0; e < og.edges.size(); ++e)
      pg.edges[e] = Edge{perm[og.edges[e].u], perm[og.edges[e].v]};
    for (int v = 0; v < og.num_nodes; ++v)
      pg.node_features[static_cast<std::size_t>(perm[v])] = og.node_features[v];
    if (permuted.node_pe)
      for (int v = 0; v < og.num_nodes; ++v)
        permuted.node_pe->values[static_cast<std::size_t>(perm[v])] =
            input.node_pe->values[static_cast<std::size_t>(v)];

    const ForwardResult base = forward(model, input);
    const ForwardResult moved = forward(model, permuted);
    for (int v = 0; v < og.num_nodes; ++v)
      for (int j = 0; j < config.hidden_dim; ++j)
        CHECK(moved.node_states(static_cast<std::size_t>(perm[v]), j) ==
              doctest::Approx(base.node_states(v, j)).epsilon(1e-6));
    for (int j = 0; j < config.outputs; ++j)
      CHECK(moved.readout(0, j) == doctest::Approx(base.readout(0, j)).epsilon(1e-6));
  }
}

TEST_CASE("zero attention and FFN weights pass embeddings through unchanged") {
  int pe_length = 1;
  const auto input = encoded_instance(PeInput::shortest, &pe_length);
  ModelConfig config = small_config(PeInput::shortest, pe_length);
  ToyModel model = make_model(config);
  for (LayerWeights& lw : model.layers) {
    for (auto* group :
         {&lw.attn_query, &lw.attn_key, &lw.attn_value, &lw.attn_edge, &lw.attn_edge_value})
      for (Matrix& m : *group) zero(m);
    zero(lw.ffn_w1);
    zero(lw.ffn_b1);
    zero(lw.ffn_w2);
    zero(lw.ffn_b2);
    zero(lw.edge_ffn_w1);
    zero(lw.edge_ffn_b1);
    zero(lw.edge_ffn_w2);
    zero(lw.edge_ffn_b2);
  }
  const ForwardResult out = forward(model, input);
  const auto& g = input.rewired.graph;
  for (int v = 0; v < g.num_nodes; ++v)
    for (int j = 0; j < config.hidden_dim; ++j) {
      const double expected =
          g.node_features[v][0] * model.node_embed_w(0, j) + model.node_embed_b(0, j);
      CHECK(out.node_states(v, j) == expected);
    }
}

TEST_CASE("loss closed forms") {
  SUBCASE("peaked logits give near-zero cross-entropy") {
    Matrix logits(1, 4);
    logits.data = {0.0, 50.0, 0.0, 0.0};
    Target target;
    target.class_id = 1;
    CHECK(loss_value(logits, target, TaskKind::multiclass) < 1e-9);
  }
  SUBCASE("uniform logits give ln C") {
    Matrix logits(1, 5);
    Target target;
    target.class_id = 2;
    CHECK(loss_value(logits, target, TaskKind::multiclass) ==
          doctest::Approx(std::log(5.0)));
  }
  SUBCASE("perfect regression gives zero") {
    Matrix pred(1, 1);
    pred.data = {0.75};
    Target target;
    target.value = 0.75;
    CHECK(loss_value(pred, target, TaskKind::regression) == 0.0);
  }
}

TEST_CASE("gradients match central finite differences for every parameter") {
  for (NormPlacement norm : {NormPlacement::pre, NormPlacement::post}) {
    for (PeInput pe :
         {PeInput::none, PeInput::shortest, PeInput::adjacency, PeInput::spectral}) {
      CAPTURE(static_cast<int>(norm));
      CAPTURE(static_cast<int>(pe));
      int pe_length = 1;
      const auto input = encoded_instance(pe, &pe_length);
      ToyModel model = make_model(small_config(pe, pe_length, norm));
      randomize_params(model, 17);
      const Target target = target_from_graph(input.rewired.graph, TaskKind::multiclass);
      CHECK(gradcheck(model, input, target) < 1e-3);
    }
  }
}

TEST_CASE("regression gradients match finite differences") {
  int pe_length = 1;
  auto input = encoded_instance(PeInput::shortest, &pe_length);
  input.rewired.graph.graph_label = GraphLabel{0.4};
  ModelConfig config = small_config(PeInput::shortest, pe_length);
  config.outputs = 1;
  config.task = TaskKind::regression;
  ToyModel model = make_model(config);
  randomize_params(model, 23);
  const Target target = target_from_graph(input.rewired.graph, TaskKind::regression);
  CHECK(gradcheck(model, input, target) < 1e-3);
}

TEST_CASE("zero loss-gradient at the exact regression optimum") {
  int pe_length = 1;
  auto input = encoded_instance(PeInput::shortest, &pe_length);
  ModelConfig config = small_config(PeInput::shortest, pe_length);
  config.outputs = 1;
  config.task = TaskKind::regression;
  const ToyModel model = make_model(config);
  const double prediction = forward(model, input).readout(0, 0);
  Target target;
  target.value = prediction;
  const Gradients grads = backward(model, input, target);
  CHECK(grads.loss == 0.0);
  for (const Matrix& g : grads.by_param)
    for (double x : g.data) CHECK(x == 0.0);
}

TEST_CASE("parameters off the computation path get zero gradients") {
  int pe_length = 1;
  const auto input = encoded_instance(PeInput::shortest, &pe_length);
  ToyModel model = make_model(small_config(PeInput::shortest, pe_length));
  const Target target = target_from_graph(input.rewired.graph, TaskKind::multiclass);
  const Gradients grads = backward(model, input, target);
  const auto params = model.named_params();
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p].first == "spectral_embed_w" || params[p].first == "adjacency_embed_w") {
      for (double x : grads.by_param[p].data) CHECK(x == 0.0);
    }
  }
}

TEST_CASE("spectral sign flips only act through the PE embedder") {
  int pe_length = 1;
  const auto input = encoded_instance(PeInput::spectral, &pe_length);
  EncodedGraph flipped = input;
  for (auto& row : flipped.node_pe->values)
    for (double& x : row) x = -x;

  ModelConfig config = small_config(PeInput::spectral, pe_length);
  ToyModel model = make_model(config);

  const ForwardResult a = forward(model, input);
  const ForwardResult b = forward(model, flipped);
  bool differs = false;
  for (std::size_t i = 0; i < a.readout.data.size(); ++i)
    if (std::abs(a.readout.data[i] - b.readout.data[i]) > 1e-12) differs = true;
  CHECK(differs);

  zero(model.spectral_embed_w);  // sign-invariant probe
  const ForwardResult c = forward(model, input);
  const ForwardResult d = forward(model, flipped);
  CHECK(c.readout == d.readout);
  CHECK(c.node_states == d.node_states);
}

TEST_CASE("PE kind mismatch is rejected") {
  int pe_length = 1;
  const auto adjacency_input = encoded_instance(PeInput::adjacency, &pe_length);
  const ToyModel model = make_model(small_config(PeInput::shortest, 2));
  CHECK_THROWS_AS(forward(model, adjacency_input), std::invalid_argument);
}

TEST_CASE("cls readout requires a CLS node and uses its feature") {
  auto g = gen_erdos(5, 0.6, 31);
  g.graph_label = GraphLabel{std::int64_t{0}};
  ModelConfig config = small_config(PeInput::none, 1);
  config.readout = Readout::cls_feature;
  const ToyModel model = make_model(config);

  EncodedGraph no_cls;
  no_cls.rewired = identity_rewiring(g);
  CHECK_THROWS_AS(forward(model, no_cls), std::invalid_argument);

  EncodedGraph with_cls;
  with_cls.rewired = add_cls_node(identity_rewiring(g));
  const ForwardResult out = forward(model, with_cls);
  CHECK(out.readout.rows == 1);
  CHECK(out.readout.cols == 3);
}

TEST_CASE("per-node readout yields one row per node") {
  int pe_length = 1;
  const auto input = encoded_instance(PeInput::adjacency, &pe_length);
  ModelConfig config = small_config(PeInput::adjacency, pe_length);
  config.readout = Readout::per_node;
  const ForwardResult out = forward(make_model(config), input);
  CHECK(out.readout.rows == static_cast<std::size_t>(input.rewired.graph.num_nodes));
}
