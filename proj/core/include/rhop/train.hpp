#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rhop/model.hpp"
#include "rhop/rng.hpp"

namespace rhop {

struct TrainConfig {
  double initial_lr = 1e-3;
  int patience = 10;  // epochs without validation improvement before halving
  double lr_factor = 0.5;
  double stop_lr = 1e-6;
  double wall_clock_cap_seconds = 6.0 * 3600.0;
  int batch_size = 32;
  std::uint64_t seed = 0;
  /// Optional extra stops for desk-scale runs: epoch cap (0 = none) and an
  /// early stop once the epoch's train accuracy reaches the target
  /// (negative = off).
  int max_epochs = 0;
  double stop_train_accuracy = -1.0;
};

/// Halves the learning rate after `patience` consecutive epochs without a
/// strict validation-loss improvement.
class PlateauLrSchedule {
 public:
  PlateauLrSchedule(double initial_lr, int patience, double factor);
  /// Feed one epoch's validation loss; returns true if the rate was halved.
  bool observe(double val_loss);
  double lr() const { return lr_; }

 private:
  double lr_;
  int patience_;
  double factor_;
  double best_;
  int bad_epochs_ = 0;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ToyModel model;
  std::vector<EpochStats> history;
  /// "lr_floor", "max_epochs", "accuracy", "wall_clock", or "diverged".
  std::string stop_reason;
};

/// Adam training loop (beta 0.9/0.999, eps 1e-8) with plateau LR halving and
/// the stop conditions above. Deterministic for fixed (seed, config, data):
/// single-threaded, explicit shuffle RNG, no wall-clock dependence unless the
/// cap actually fires. Spectral sign-flip augmentation is applied per sample
/// per epoch when the model consumes spectral PEs.
TrainResult train(ToyModel model, const std::vector<EncodedGraph>& train_set,
                  const std::vector<EncodedGraph>& val_set, const TrainConfig& tc);

/// Loss/accuracy of a model over a dataset (no augmentation).
std::pair<double, double> evaluate(const ToyModel& model,
                                   const std::vector<EncodedGraph>& dataset);

/// One JSON object per epoch: {"epoch", "train_loss", "val_loss",
/// "train_acc", "val_acc", "lr"}.
void write_history_jsonl(const std::vector<EpochStats>& history,
                         const std::filesystem::path& path);

/// Flips the sign of each spectral coordinate column with probability 1/2.
void flip_spectral_signs(NodePe& pe, SplitMix64& rng);

}  // namespace rhop
