#pragma once

#include "tet/model/models.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tet {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int max_epochs = 40;
  int patience = 10;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_rmse = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_rmse = 0.0;
  std::string checkpoint_id;
  std::uint64_t seed = 0;
};

/// Observes every optimizer step: the batch loss and the raw means the loss
/// was computed from.
struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;
  std::vector<double> mu;
  std::vector<double> labels;
};
using StepObserver = std::function<void(const StepRecord&)>;

/// RMSE of clamped means against labels, evaluation mode.
double validation_rmse(Regressor& model, std::span<const Example> examples);

/// Mini-batch Adam on the mean NLL, shuffled per epoch with `seed`. Stops
/// after `patience` epochs without a strict validation improvement and
/// restores the best parameters.
TrainReport train(Regressor& model, std::span<const Example> train_set, std::span<const Example> validation_set,
                  const TrainConfig& config, std::uint64_t seed, const StepObserver& observer = {});

/// Tab-separated epoch, train_loss, val_rmse table.
std::string format_train_report(const TrainReport& report);

/// FNV-1a of the checkpoint bytes, hex.
std::string checkpoint_digest(const std::string& bytes);

}  // namespace tet
