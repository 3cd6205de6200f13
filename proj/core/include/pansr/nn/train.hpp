#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "pansr/dataset.hpp"
#include "pansr/nn/model.hpp"

namespace pansr::nn {

struct TrainConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int max_steps = 2000;
  std::uint64_t seed = 0;
  /// Steps between checkpoint callbacks; 0 = only at the end.
  int checkpoint_interval = 0;
  /// Steps between history entries (train loss average plus val loss).
  int eval_interval = 100;
  /// Side of the random LR crop drawn from each tile per step; 0 uses whole tiles.
  int patch_lr = 0;

  void validate() const;
};

/// One training example: the network input (already bicubic-upsampled for
/// pre-upsampled architectures) and the normalized HR target, both batch 1.
struct TrainSample {
  Tensor input;
  Tensor target;
};

std::vector<TrainSample> make_samples(const Model& model, const std::vector<TilePair>& pairs);

struct HistoryEntry {
  int step = 0;
  /// Mean batch loss over the steps since the previous entry (step 0: the
  /// first batch before any update).
  double train_loss = 0.0;
  std::optional<double> val_loss;
};

/// Mean squared error of the model over whole samples, reduced in sample order.
double mse_loss(const Model& model, const std::vector<TrainSample>& samples);

class Adam {
 public:
  Adam(const ParamSet& like, const TrainConfig& cfg);
  /// One update; parameters are rounded to float32 afterwards.
  void step(ParamSet& params, const ParamSet& grads);
  std::uint64_t steps() const { return t_; }

 private:
  double lr_, b1_, b2_, eps_;
  std::uint64_t t_ = 0;
  ParamSet m_, v_;
};

struct TrainCallbacks {
  std::function<void(const HistoryEntry&)> on_entry;
  /// Called at checkpoint intervals, at the end, and before a divergence abort.
  std::function<void(int step, const Model&)> on_checkpoint;
};

/// Adam on MSE. Batches are drawn from a seeded per-epoch shuffle; per-sample
/// gradients may run concurrently but are summed in batch order, so the
/// result is independent of the thread count. A non-finite loss or activation
/// triggers on_checkpoint and then throws NumericError.
std::vector<HistoryEntry> train(Model& model, const std::vector<TrainSample>& train_set,
                                const std::vector<TrainSample>& val_set, const TrainConfig& cfg,
                                const TrainCallbacks& callbacks = {});

void write_history(const std::filesystem::path& path, const Model& model, const TrainConfig& cfg,
                   const std::vector<HistoryEntry>& history);

}  // namespace pansr::nn
