#pragma once

#include "tet/eval/metrics.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tet {

/// Metrics of one trained model on one test split.
struct SeedMetrics {
  std::uint64_t seed = 0;
  double rmse = 0.0;
  double mae = 0.0;
  double auc = 0.0;
  double recall_at_budget = 0.0;
  double coverage = 0.0;
  double width = 0.0;
};

/// Predictions are reported ones (mean already clamped). AUC and recall are
/// NaN when the test split has no low-satisfaction enrollment (or only those).
SeedMetrics compute_metrics(std::span<const GaussianPrediction> preds, std::span<const double> labels,
                            std::uint64_t seed, RiskScore risk = RiskScore::kNegativeMean, double budget = 0.10,
                            double level = 0.90);

inline constexpr std::array<const char*, 6> kMetricNames{"rmse", "mae", "auc", "recall_at_budget", "coverage", "width"};

/// One row per (model, horizon): mean and sample standard deviation over seeds.
struct MetricRow {
  std::string model;
  int horizon = 0;
  int seeds = 0;
  std::array<double, 6> mean{};
  std::array<double, 6> sd{};
};

MetricRow aggregate_seeds(const std::string& model, int horizon, const std::vector<SeedMetrics>& runs);

/// Columns: model, horizon, seeds, then <metric>_mean, <metric>_sd for
/// rmse, mae, auc, recall_at_budget, coverage, width.
std::string format_metric_table(const std::vector<MetricRow>& rows);
std::vector<MetricRow> parse_metric_table(const std::string& text);

/// key=value lines, one block per row: <model>.h<horizon>.<metric>_{mean,sd}.
std::string format_metric_kv(const std::vector<MetricRow>& rows);

/// Models as rows, horizons as column groups of "RMSE mean+-sd" and "MAE".
std::string format_summary(const std::vector<MetricRow>& rows);

}  // namespace tet
