#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rhop/train.hpp"

namespace rhop {

struct NeighborsMatchCell {
  int r = 1;
  int r_p = 1;
  bool cls = false;
  double final_train_accuracy = 0.0;
  int epochs = 0;
  std::string stop_reason;
};

struct NeighborsMatchOptions {
  int samples = 256;
  int hidden_dim = 32;
  int heads = 4;
  TrainConfig tc;
  std::uint64_t seed = 0;
};

/// Over-squashing sweep: for each (r, r_p) generates depth-r_p trees, rewires
/// at r (optionally adding a CLS node), attaches adjacency PEs, and trains a
/// Transformer with L = r_p + 1 layers reading out at the root node. Returns
/// the per-cell final train accuracy.
std::vector<NeighborsMatchCell> run_neighborsmatch(const std::vector<int>& r_grid,
                                                   const std::vector<int>& rp_grid, bool use_cls,
                                                   const NeighborsMatchOptions& options);

struct ErdosPeSetting {
  PeInput pe = PeInput::shortest;
  /// Adjacency-powers vector length (the "Adj-k" truncation).
  int powers = 5;
  /// Spectral embedding width.
  int q = 8;
  std::string name() const;
};

struct ErdosOptions {
  int num_graphs = 30;
  int n = 20;
  double p = 0.2;
  int hidden_dim = 32;
  int heads = 4;
  int layers = 4;
  TrainConfig tc;
  std::uint64_t seed = 0;
};

struct ErdosCurve {
  std::string name;
  std::vector<EpochStats> history;
  /// First epoch whose train accuracy hit 1.0, or -1 if never.
  int epochs_to_full = -1;
  double final_train_accuracy = 0.0;
  std::string stop_reason;
};

/// Graph-retrieval probe of encoding power: labeled Erdos graphs rewired to
/// full per-component connectivity, one training curve per PE setting. Train
/// accuracy is the metric of interest (overfitting is the point).
std::vector<ErdosCurve> run_erdos_retrieval(const std::vector<ErdosPeSetting>& settings,
                                            const ErdosOptions& options);

/// Shared preprocessing for the retrieval task: rewires each graph to its own
/// saturation radius (max finite hop distance) and applies the PE setting.
std::vector<EncodedGraph> erdos_retrieval_inputs(const std::vector<AttributedGraph>& graphs,
                                                 const ErdosPeSetting& setting, int* max_r_out);

}  // namespace rhop
