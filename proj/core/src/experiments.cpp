#include "rhop/experiments.hpp"

#include <algorithm>
#include <stdexcept>

#include "rhop/generate.hpp"
#include "rhop/linalg.hpp"

namespace rhop {

std::string ErdosPeSetting::name() const {
  switch (pe) {
    case PeInput::none: return "none";
    case PeInput::shortest: return "short";
    case PeInput::adjacency: return "adj-" + std::to_string(powers);
    case PeInput::spectral: return "lp-" + std::to_string(q);
  }
  throw std::invalid_argument("unknown PE input");
}

namespace {

/// Largest finite hop distance in the graph (expansion radius at which
/// rewiring saturates). 1 for edgeless graphs so expand() stays valid.
int saturation_radius(const AttributedGraph& g) {
  int best = 1;
  for (int s = 0; s < g.num_nodes; ++s) {
    const auto dist = bfs_distances(g, s, g.num_nodes);
    for (int d : dist) best = std::max(best, d);
  }
  return best;
}

}  // namespace

std::vector<NeighborsMatchCell> run_neighborsmatch(const std::vector<int>& r_grid,
                                                   const std::vector<int>& rp_grid, bool use_cls,
                                                   const NeighborsMatchOptions& options) {
  if (r_grid.empty() || rp_grid.empty()) throw std::invalid_argument("empty grid");

  std::vector<NeighborsMatchCell> cells;
  for (int r_p : rp_grid) {
    const std::vector<AttributedGraph> trees =
        gen_neighborsmatch_batch(options.samples, r_p,
                                 SplitMix64(options.seed).split(static_cast<std::uint64_t>(r_p)).next());
    for (int r : r_grid) {
      std::vector<EncodedGraph> encoded;
      encoded.reserve(trees.size());
      for (const AttributedGraph& tree : trees) {
        RewiredGraph rw = expand_receptive_field(tree, r);
        if (use_cls) rw = add_cls_node(rw);
        encoded.push_back(encode_adjacency_powers(rw));
      }

      ModelConfig config;
      config.hidden_dim = options.hidden_dim;
      config.heads = options.heads;
      config.layers = r_p + 1;
      config.readout = Readout::per_node;
      config.norm = NormPlacement::pre;
      config.seed = SplitMix64(options.seed).split(1000 + static_cast<std::uint64_t>(r)).next();
      config.node_feature_dim = trees.front().node_feature_dim();
      config.edge_feature_dim = 0;
      config.pe = PeInput::adjacency;
      config.pe_length = r;
      config.outputs = 1 << r_p;
      config.task = TaskKind::multiclass;

      TrainConfig tc = options.tc;
      tc.seed = SplitMix64(options.seed).split(2000 + static_cast<std::uint64_t>(r * 100 + r_p)).next();

      TrainResult result = train(make_model(config), encoded, encoded, tc);

      NeighborsMatchCell cell;
      cell.r = r;
      cell.r_p = r_p;
      cell.cls = use_cls;
      cell.epochs = static_cast<int>(result.history.size());
      cell.final_train_accuracy =
          result.history.empty() ? 0.0 : result.history.back().train_accuracy;
      cell.stop_reason = result.stop_reason;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<EncodedGraph> erdos_retrieval_inputs(const std::vector<AttributedGraph>& graphs,
                                                 const ErdosPeSetting& setting, int* max_r_out) {
  int max_r = 1;
  std::vector<EncodedGraph> encoded;
  encoded.reserve(graphs.size());
  for (const AttributedGraph& g : graphs) {
    const int radius = saturation_radius(g);
    max_r = std::max(max_r, radius);
    RewiredGraph rw = expand_receptive_field(g, radius);
    switch (setting.pe) {
      case PeInput::none: {
        EncodedGraph plain;
        plain.rewired = std::move(rw);
        encoded.push_back(std::move(plain));
        break;
      }
      case PeInput::shortest:
        encoded.push_back(encode_shortest_path(rw));
        break;
      case PeInput::adjacency:
        encoded.push_back(encode_adjacency_powers(rw, setting.powers));
        break;
      case PeInput::spectral:
        encoded.push_back(encode_spectral(rw, setting.q));
        break;
    }
  }
  if (max_r_out) *max_r_out = max_r;
  return encoded;
}

std::vector<ErdosCurve> run_erdos_retrieval(const std::vector<ErdosPeSetting>& settings,
                                            const ErdosOptions& options) {
  if (settings.empty()) throw std::invalid_argument("no PE settings given");
  const std::vector<AttributedGraph> graphs =
      gen_erdos_retrieval_dataset(options.num_graphs, options.n, options.p, options.seed);

  std::vector<ErdosCurve> curves;
  for (std::size_t s = 0; s < settings.size(); ++s) {
    const ErdosPeSetting& setting = settings[s];
    int max_r = 1;
    std::vector<EncodedGraph> encoded = erdos_retrieval_inputs(graphs, setting, &max_r);

    ModelConfig config;
    config.hidden_dim = options.hidden_dim;
    config.heads = options.heads;
    config.layers = options.layers;
    config.readout = Readout::mean_pool;
    config.norm = NormPlacement::pre;
    config.seed = SplitMix64(options.seed).split(3000 + s).next();
    config.node_feature_dim = graphs.front().node_feature_dim();
    config.edge_feature_dim = 0;
    config.pe = setting.pe;
    switch (setting.pe) {
      case PeInput::none: config.pe_length = 1; break;
      case PeInput::shortest: config.pe_length = max_r; break;
      case PeInput::adjacency: config.pe_length = setting.powers; break;
      case PeInput::spectral: config.pe_length = setting.q; break;
    }
    config.outputs = options.num_graphs;
    config.task = TaskKind::multiclass;

    TrainConfig tc = options.tc;
    tc.seed = SplitMix64(options.seed).split(4000 + s).next();
    if (tc.stop_train_accuracy < 0.0) tc.stop_train_accuracy = 1.0;

    TrainResult result = train(make_model(config), encoded, encoded, tc);

    ErdosCurve curve;
    curve.name = setting.name();
    curve.history = result.history;
    curve.stop_reason = result.stop_reason;
    curve.final_train_accuracy =
        result.history.empty() ? 0.0 : result.history.back().train_accuracy;
    for (const EpochStats& e : result.history) {
      if (e.train_accuracy >= 1.0) {
        curve.epochs_to_full = e.epoch;
        break;
      }
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace rhop
