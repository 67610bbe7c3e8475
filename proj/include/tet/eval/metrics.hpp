#pragma once

#include "tet/fusion/fusion_head.hpp"

#include <span>
#include <utility>
#include <vector>

namespace tet {

double rmse(std::span<const double> preds, std::span<const double> labels);
double mae(std::span<const double> preds, std::span<const double> labels);

/// Probability that a random low-satisfaction enrollment (label <= threshold)
/// has a higher risk score than a random other one; ties count one half.
double auc_low_satisfaction(std::span<const double> risk, std::span<const double> labels, double threshold = 3.0);

/// Fraction of all positives among the top ceil(budget * N) risk scores;
/// equal scores keep input order.
double recall_at_budget(std::span<const double> risk, std::span<const double> labels, double budget = 0.10,
                        double threshold = 3.0);

struct CoverageWidth {
  double coverage = 0.0;
  double mean_width = 0.0;
};

CoverageWidth coverage_and_width(std::span<const GaussianPrediction> preds, std::span<const double> labels,
                                 double level = 0.90);

/// (a - b) / a.
double relative_improvement(double a, double b);

enum class RiskScore { kNegativeMean, kGaussianTail };

/// -mu, or Pr(y <= threshold) = Phi((threshold - mu) / sigma).
std::vector<double> risk_scores(std::span<const GaussianPrediction> preds, RiskScore kind = RiskScore::kNegativeMean,
                                double threshold = 3.0);

}  // namespace tet
