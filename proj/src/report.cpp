#include "tet/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tet {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double metric_or_nan(auto&& f) {
  try {
    return f();
  } catch (const std::invalid_argument&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

SeedMetrics compute_metrics(std::span<const GaussianPrediction> preds, std::span<const double> labels,
                            std::uint64_t seed, RiskScore risk, double budget, double level) {
  std::vector<double> mu;
  for (const auto& p : preds) mu.push_back(p.mu);
  const auto scores = risk_scores(preds, risk);
  SeedMetrics m;
  m.seed = seed;
  m.rmse = rmse(mu, labels);
  m.mae = mae(mu, labels);
  m.auc = metric_or_nan([&] { return auc_low_satisfaction(scores, labels); });
  m.recall_at_budget = metric_or_nan([&] { return recall_at_budget(scores, labels, budget); });
  const auto cw = coverage_and_width(preds, labels, level);
  m.coverage = cw.coverage;
  m.width = cw.mean_width;
  return m;
}

MetricRow aggregate_seeds(const std::string& model, int horizon, const std::vector<SeedMetrics>& runs) {
  if (runs.empty()) throw std::invalid_argument("no seed runs to aggregate for " + model);
  MetricRow row;
  row.model = model;
  row.horizon = horizon;
  row.seeds = static_cast<int>(runs.size());
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    std::vector<double> v;
    for (const auto& r : runs) {
      const std::array<double, 6> all{r.rmse, r.mae, r.auc, r.recall_at_budget, r.coverage, r.width};
      v.push_back(all[k]);
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    row.mean[k] = mean;
    row.sd[k] = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return row;
}

std::string format_metric_table(const std::vector<MetricRow>& rows) {
  std::string out = "model\thorizon\tseeds";
  for (const char* name : kMetricNames) out += std::string("\t") + name + "_mean\t" + name + "_sd";
  out += '\n';
  for (const auto& r : rows) {
    out += r.model + "\t" + std::to_string(r.horizon) + "\t" + std::to_string(r.seeds);
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) out += "\t" + fmt(r.mean[k]) + "\t" + fmt(r.sd[k]);
    out += '\n';
  }
  return out;
}

std::vector<MetricRow> parse_metric_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<MetricRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    MetricRow r;
    std::string cell;
    auto next = [&](const char* field) {
      if (!std::getline(ls, cell, '\t')) throw std::runtime_error("metric table line " + std::to_string(line_no) + ": missing " + field);
      return cell;
    };
    r.model = next("model");
    r.horizon = std::stoi(next("horizon"));
    r.seeds = std::stoi(next("seeds"));
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      r.mean[k] = std::stod(next("metric mean"));
      r.sd[k] = std::stod(next("metric sd"));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_metric_kv(const std::vector<MetricRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    const std::string prefix = r.model + ".h" + std::to_string(r.horizon) + ".";
    out += prefix + "seeds=" + std::to_string(r.seeds) + "\n";
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      out += prefix + kMetricNames[k] + "_mean=" + fmt(r.mean[k]) + "\n";
      out += prefix + kMetricNames[k] + "_sd=" + fmt(r.sd[k]) + "\n";
    }
  }
  return out;
}

std::string format_summary(const std::vector<MetricRow>& rows) {
  std::set<int> horizons;
  std::vector<std::string> models;
  std::map<std::pair<std::string, int>, const MetricRow*> index;
  for (const auto& r : rows) {
    horizons.insert(r.horizon);
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    index[{r.model, r.horizon}] = &r;
  }
  std::string out = "model";
  for (int h : horizons) out += "\t" + std::to_string(h) + "d_rmse\t" + std::to_string(h) + "d_mae";
  out += '\n';
  auto cell = [](double m, double s) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f+-%.2f", m, s);
    return std::string(buf);
  };
  for (const auto& m : models) {
    out += m;
    for (int h : horizons) {
      const auto it = index.find({m, h});
      if (it == index.end()) {
        out += "\t-\t-";
      } else {
        out += "\t" + cell(it->second->mean[0], it->second->sd[0]) + "\t" + cell(it->second->mean[1], it->second->sd[1]);
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace tet
