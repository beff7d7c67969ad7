#include "rhop/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "rhop/errors.hpp"

namespace rhop {

PlateauLrSchedule::PlateauLrSchedule(double initial_lr, int patience, double factor)
    : lr_(initial_lr),
      patience_(patience),
      factor_(factor),
      best_(std::numeric_limits<double>::infinity()) {
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
}

bool PlateauLrSchedule::observe(double val_loss) {
  if (val_loss < best_) {
    best_ = val_loss;
    bad_epochs_ = 0;
    return false;
  }
  if (++bad_epochs_ >= patience_) {
    lr_ *= factor_;
    bad_epochs_ = 0;
    return true;
  }
  return false;
}

namespace {

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::int64_t t = 0;
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

void adam_step(ToyModel& model, AdamState& state, const std::vector<Matrix>& grads, double lr) {
  auto params = model.named_params();
  state.t += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& weights = *params[p].second;
    Matrix& m = state.m[p];
    Matrix& v = state.v[p];
    const Matrix& g = grads[p];
    for (std::size_t i = 0; i < weights.data.size(); ++i) {
      m.data[i] = kBeta1 * m.data[i] + (1.0 - kBeta1) * g.data[i];
      v.data[i] = kBeta2 * v.data[i] + (1.0 - kBeta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      weights.data[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
    }
  }
}

EncodedGraph with_flipped_signs(const EncodedGraph& g, SplitMix64& rng) {
  EncodedGraph copy = g;
  if (copy.node_pe) flip_spectral_signs(*copy.node_pe, rng);
  return copy;
}

}  // namespace

void flip_spectral_signs(NodePe& pe, SplitMix64& rng) {
  if (pe.values.empty()) return;
  const std::size_t q = pe.values.front().size();
  for (std::size_t k = 0; k < q; ++k) {
    if (!rng.bernoulli(0.5)) continue;
    for (auto& row : pe.values) row[k] = -row[k];
  }
}

std::pair<double, double> evaluate(const ToyModel& model,
                                   const std::vector<EncodedGraph>& dataset) {
  double loss_sum = 0.0, acc_sum = 0.0;
  for (const EncodedGraph& g : dataset) {
    const Target target = target_from_graph(g.rewired.graph, model.config.task);
    const ForwardResult out = forward(model, g);
    loss_sum += loss_value(out.readout, target, model.config.task);
    const double acc = accuracy_value(out.readout, target, model.config.task);
    if (!std::isnan(acc)) acc_sum += acc;
  }
  const double n = static_cast<double>(dataset.size());
  return {loss_sum / n, acc_sum / n};
}

TrainResult train(ToyModel model, const std::vector<EncodedGraph>& train_set,
                  const std::vector<EncodedGraph>& val_set, const TrainConfig& tc) {
  if (train_set.empty()) throw std::invalid_argument("empty training split");
  if (val_set.empty()) throw std::invalid_argument("empty validation split");
  if (tc.stop_lr <= 0.0 || tc.stop_lr >= tc.initial_lr)
    throw std::invalid_argument("require 0 < stop_lr < initial_lr");
  if (tc.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");

  std::vector<Target> train_targets;
  train_targets.reserve(train_set.size());
  for (const EncodedGraph& g : train_set)
    train_targets.push_back(target_from_graph(g.rewired.graph, model.config.task));

  AdamState adam;
  for (auto& [name, matrix] : model.named_params()) {
    adam.m.push_back(Matrix(matrix->rows, matrix->cols));
    adam.v.push_back(Matrix(matrix->rows, matrix->cols));
  }

  PlateauLrSchedule schedule(tc.initial_lr, tc.patience, tc.lr_factor);
  SplitMix64 rng(tc.seed);
  const bool spectral = model.config.pe == PeInput::spectral;
  const auto start = std::chrono::steady_clock::now();

  TrainResult result;
  result.stop_reason = "max_epochs";

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  int epoch = 0;
  while (true) {
    if (tc.max_epochs > 0 && epoch >= tc.max_epochs) {
      result.stop_reason = "max_epochs";
      break;
    }
    ++epoch;
    rng.shuffle(order);

    double train_loss = 0.0, train_acc = 0.0;
    std::size_t seen = 0;
    bool diverged = false;
    for (std::size_t batch_start = 0; batch_start < order.size();
         batch_start += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t batch_end =
          std::min(order.size(), batch_start + static_cast<std::size_t>(tc.batch_size));
      std::vector<Matrix> grad_sum;
      try {
        for (std::size_t i = batch_start; i < batch_end; ++i) {
          const std::size_t idx = order[i];
          Gradients grads =
              spectral ? backward(model, with_flipped_signs(train_set[idx], rng),
                                  train_targets[idx])
                       : backward(model, train_set[idx], train_targets[idx]);
          train_loss += grads.loss;
          const double acc =
              accuracy_value(grads.readout, train_targets[idx], model.config.task);
          if (!std::isnan(acc)) train_acc += acc;
          if (grad_sum.empty()) {
            grad_sum = std::move(grads.by_param);
          } else {
            for (std::size_t p = 0; p < grad_sum.size(); ++p)
              for (std::size_t j = 0; j < grad_sum[p].data.size(); ++j)
                grad_sum[p].data[j] += grads.by_param[p].data[j];
          }
          ++seen;
        }
      } catch (const numeric_error&) {
        diverged = true;
        break;
      }
      const double inv = 1.0 / static_cast<double>(batch_end - batch_start);
      for (Matrix& g : grad_sum)
        for (double& x : g.data) x *= inv;
      adam_step(model, adam, grad_sum, schedule.lr());
    }
    if (diverged) {
      result.stop_reason = "diverged";
      break;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = schedule.lr();
    stats.train_loss = train_loss / static_cast<double>(seen);
    stats.train_accuracy = train_acc / static_cast<double>(seen);
    const auto [val_loss, val_acc] = evaluate(model, val_set);
    stats.val_loss = val_loss;
    stats.val_accuracy = val_acc;
    result.history.push_back(stats);

    if (!std::isfinite(stats.train_loss) || !std::isfinite(val_loss)) {
      result.stop_reason = "diverged";
      break;
    }
    if (tc.stop_train_accuracy > 0.0 && stats.train_accuracy >= tc.stop_train_accuracy) {
      result.stop_reason = "accuracy";
      break;
    }
    schedule.observe(val_loss);
    if (schedule.lr() < tc.stop_lr) {
      result.stop_reason = "lr_floor";
      break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > tc.wall_clock_cap_seconds) {
      result.stop_reason = "wall_clock";
      break;
    }
  }

  result.model = std::move(model);
  return result;
}

void write_history_jsonl(const std::vector<EpochStats>& history,
                         const std::filesystem::path& path) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw io_error("cannot write '" + tmp.string() + "'");
    for (const EpochStats& s : history) {
      nlohmann::json obj;
      obj["epoch"] = s.epoch;
      obj["train_loss"] = s.train_loss;
      obj["val_loss"] = s.val_loss;
      obj["train_acc"] = s.train_accuracy;
      obj["val_acc"] = s.val_accuracy;
      obj["lr"] = s.lr;
      out << obj.dump() << '\n';
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("cannot rename '" + tmp.string() + "'");
}

}  // namespace rhop
