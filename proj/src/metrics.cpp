#include "tet/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tet {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("length mismatch: " + std::to_string(a) + " predictions vs " +
                                          std::to_string(b) + " labels");
  if (a == 0) throw std::invalid_argument("metric over an empty sample");
}

}  // namespace

double rmse(std::span<const double> preds, std::span<const double> labels) {
  check_lengths(preds.size(), labels.size());
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - labels[i]) * (preds[i] - labels[i]);
  return std::sqrt(s / static_cast<double>(preds.size()));
}

double mae(std::span<const double> preds, std::span<const double> labels) {
  check_lengths(preds.size(), labels.size());
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += std::abs(preds[i] - labels[i]);
  return s / static_cast<double>(preds.size());
}

double auc_low_satisfaction(std::span<const double> risk, std::span<const double> labels, double threshold) {
  check_lengths(risk.size(), labels.size());
  // Rank-sum with midranks for ties.
  std::vector<std::size_t> order(risk.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return risk[a] < risk[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && risk[order[j]] == risk[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] <= threshold) {
        pos_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = risk.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("AUC needs both low-satisfaction and other enrollments");
  }
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double recall_at_budget(std::span<const double> risk, std::span<const double> labels, double budget, double threshold) {
  check_lengths(risk.size(), labels.size());
  if (!(budget > 0.0 && budget <= 1.0)) throw std::invalid_argument("budget must lie in (0,1]");
  std::vector<std::size_t> order(risk.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return risk[a] > risk[b]; });
  const auto top = static_cast<std::size_t>(std::ceil(budget * static_cast<double>(risk.size()) - 1e-9));
  std::size_t total = 0, hit = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]] <= threshold) {
      ++total;
      if (r < top) ++hit;
    }
  }
  if (total == 0) throw std::invalid_argument("recall_at_budget needs at least one low-satisfaction enrollment");
  return static_cast<double>(hit) / static_cast<double>(total);
}

CoverageWidth coverage_and_width(std::span<const GaussianPrediction> preds, std::span<const double> labels,
                                 double level) {
  check_lengths(preds.size(), labels.size());
  CoverageWidth out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto [lo, hi] = interval(preds[i], level);
    if (labels[i] >= lo && labels[i] <= hi) out.coverage += 1.0;
    out.mean_width += hi - lo;
  }
  out.coverage /= static_cast<double>(preds.size());
  out.mean_width /= static_cast<double>(preds.size());
  return out;
}

double relative_improvement(double a, double b) {
  if (!(a > 0.0)) throw std::invalid_argument("relative improvement needs a positive reference");
  return (a - b) / a;
}

std::vector<double> risk_scores(std::span<const GaussianPrediction> preds, RiskScore kind, double threshold) {
  std::vector<double> out;
  out.reserve(preds.size());
  for (const auto& p : preds) {
    if (kind == RiskScore::kNegativeMean) {
      out.push_back(-p.mu);
    } else {
      out.push_back(0.5 * std::erfc(-((threshold - p.mu) / p.sigma()) / std::sqrt(2.0)));
    }
  }
  return out;
}

}  // namespace tet
