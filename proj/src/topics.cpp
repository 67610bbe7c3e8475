#include "tet/text/topics.hpp"

#include "tet/numeric/random.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tet {

std::size_t count_distinct_rows(const Mat& m) {
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.emplace_back(m.row(r).data(), m.row(r).data() + m.cols());
  std::sort(rows.begin(), rows.end());
  return static_cast<std::size_t>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

namespace {

Eigen::VectorXd nearest_sq_dist(const Mat& x, const Mat& centroids, Eigen::Index count, std::vector<int>* assign) {
  Eigen::VectorXd best = Eigen::VectorXd::Constant(x.rows(), std::numeric_limits<double>::infinity());
  if (assign) assign->assign(static_cast<std::size_t>(x.rows()), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < count; ++j) {
      const double d = (x.row(i) - centroids.row(j)).squaredNorm();
      if (d < best[i]) {
        best[i] = d;
        if (assign) (*assign)[static_cast<std::size_t>(i)] = static_cast<int>(j);
      }
    }
  }
  return best;
}

}  // namespace

TopicModel fit_topics(const Mat& x, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("topic model needs K >= 2");
  if (count_distinct_rows(x) < static_cast<std::size_t>(k)) {
    throw std::invalid_argument("topic model needs at least K=" + std::to_string(k) +
                                " distinct training vectors, got " + std::to_string(count_distinct_rows(x)));
  }
  Rng rng(seed);
  Mat centroids(k, x.cols());
  centroids.row(0) = x.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(x.rows()))));
  for (int j = 1; j < k; ++j) {
    const Eigen::VectorXd d2 = nearest_sq_dist(x, centroids, j, nullptr);
    const double total = d2.sum();
    double target = uniform01(rng) * total;
    Eigen::Index pick = 0;
    // Rows already chosen have zero weight, so a positive-weight row is always found.
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      target -= d2[i];
      if (target < 0.0) break;
    }
    centroids.row(j) = x.row(pick);
  }

  std::vector<int> assign;
  for (int iter = 0; iter < 50; ++iter) {
    nearest_sq_dist(x, centroids, k, &assign);
    Mat sums = Mat::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<std::size_t>(j)] > 0) centroids.row(j) = sums.row(j) / counts[static_cast<std::size_t>(j)];
    }
  }

  TopicModel model;
  model.centroids = std::move(centroids);
  model.temperature = std::max(nearest_sq_dist(x, model.centroids, k, nullptr).mean(), 1e-12);
  return model;
}

RowVec topic_distribution(const Mat& snippets, const TopicModel& model) {
  if (snippets.rows() == 0) throw ShapeError("topic_distribution needs at least one snippet");
  if (snippets.cols() != model.centroids.cols()) {
    throw ShapeError("topic_distribution width mismatch: " + describe_shapes(snippets, model.centroids));
  }
  const int k = model.topics();
  RowVec theta = RowVec::Zero(k);
  for (Eigen::Index i = 0; i < snippets.rows(); ++i) {
    RowVec logits(k);
    for (int j = 0; j < k; ++j) logits[j] = -(snippets.row(i) - model.centroids.row(j)).squaredNorm() / model.temperature;
    logits.array() -= logits.maxCoeff();
    RowVec p = logits.array().exp().matrix();
    theta += p / p.sum();
  }
  return theta / static_cast<double>(snippets.rows());
}

}  // namespace tet
