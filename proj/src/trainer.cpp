#include "tet/training/trainer.hpp"

#include "tet/numeric/checkpoint.hpp"
#include "tet/text/stub_embed.hpp"
#include "tet/training/adam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace tet {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be non-negative");
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  if (batch_size < 1 || max_epochs < 1) throw std::invalid_argument("batch_size and max_epochs must be positive");
}

double validation_rmse(Regressor& model, std::span<const Example> examples) {
  if (examples.empty()) throw std::invalid_argument("validation split is empty");
  double sse = 0.0;
  for (const auto& ex : examples) {
    const double r = model.predict(ex).reported().mu - ex.label;
    sse += r * r;
  }
  return std::sqrt(sse / static_cast<double>(examples.size()));
}

TrainReport train(Regressor& model, std::span<const Example> train_set, std::span<const Example> validation_set,
                  const TrainConfig& config, std::uint64_t seed, const StepObserver& observer) {
  config.validate();
  if (train_set.empty() || validation_set.empty()) {
    throw std::invalid_argument("training needs non-empty train and validation splits");
  }
  Rng rng(seed);
  auto params = model.parameters();
  AdamState state = AdamState::for_params(params);
  const AdamConfig adam{config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps};

  TrainReport report;
  report.seed = seed;
  std::vector<Mat> best = model.snapshot();
  double best_rmse = std::numeric_limits<double>::infinity();
  int stale = 0;
  std::size_t step = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      model.zero_grad();
      StepRecord rec;
      rec.step = step;
      for (std::size_t i = start; i < end; ++i) {
        const Example& ex = train_set[order[i]];
        TapeD tape;
        auto [mu, log_var] = model.forward(tape, ex, true, rng);
        VarD loss = gaussian_nll(mu, log_var, ex.label);
        const double value = loss.scalar();
        if (!std::isfinite(value)) {
          throw std::runtime_error("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(start / static_cast<std::size_t>(config.batch_size)) +
                                   " (example " + ex.enrollment_id + ")");
        }
        tape.backward(loss, inv_batch);
        rec.loss += value * inv_batch;
        epoch_loss += value;
        if (observer) {
          rec.mu.push_back(mu.scalar());
          rec.labels.push_back(ex.label);
        }
      }
      adam_step(params, state, adam);
      if (observer) observer(rec);
      ++step;
    }

    const double rmse = validation_rmse(model, validation_set);
    report.epochs.push_back({epoch, epoch_loss / static_cast<double>(order.size()), rmse});
    if (rmse < best_rmse) {
      best_rmse = rmse;
      best = model.snapshot();
      report.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  model.restore(best);
  report.best_val_rmse = best_rmse;
  report.checkpoint_id = checkpoint_digest(encode_checkpoint(model.param_tensors()));
  return report;
}

std::string format_train_report(const TrainReport& report) {
  std::string out = "epoch\ttrain_loss\tval_rmse\n";
  char buf[128];
  for (const auto& e : report.epochs) {
    std::snprintf(buf, sizeof(buf), "%d\t%.10g\t%.10g\n", e.epoch, e.train_loss, e.val_rmse);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "# best_epoch=%d best_val_rmse=%.10g seed=%llu checkpoint=", report.best_epoch,
                report.best_val_rmse, static_cast<unsigned long long>(report.seed));
  out += buf + report.checkpoint_id + "\n";
  return out;
}

std::string checkpoint_digest(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

}  // namespace tet
