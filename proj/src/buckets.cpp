#include "tet/encoder/buckets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tet {

int BucketEdges::bin_of_log(double log_gap) const {
  return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), log_gap) - edges.begin());
}

int BucketEdges::bin_of_gap(double gap_seconds) const {
  return bin_of_log(std::log1p(std::max(0.0, gap_seconds)));
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return values[rank - 1];
}

BucketEdges edges_from_max_gap(double max_gap, int bins) {
  if (bins < 2) throw std::invalid_argument("time-gap bucketing needs at least 2 bins");
  if (!(max_gap > 0.0) || !std::isfinite(max_gap)) {
    throw std::invalid_argument("time-gap calibration found no positive gap; reduce B or supply more data");
  }
  BucketEdges out;
  out.max_gap = max_gap;
  const double top = std::log1p(max_gap);
  for (int k = 1; k < bins; ++k) out.edges.push_back(top * k / bins);
  return out;
}

BucketEdges calibrate_buckets(std::span<const HorizonView> train_views, int bins) {
  std::vector<double> gaps;
  for (const auto& v : train_views) {
    for (std::size_t j = 1; j < v.events.size(); ++j) {
      gaps.push_back(v.events[j].timestamp - v.events[j - 1].timestamp);
    }
  }
  if (gaps.empty()) {
    throw std::invalid_argument("time-gap calibration found no inter-event gaps in the training split; "
                                "reduce B or supply more data");
  }
  return edges_from_max_gap(nearest_rank_quantile(std::move(gaps), 0.995), bins);
}

}  // namespace tet
