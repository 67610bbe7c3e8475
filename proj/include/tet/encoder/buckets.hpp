#pragma once

#include "tet/data/types.hpp"

#include <span>
#include <vector>

namespace tet {

/// B-1 ascending edges over log(1 + gap seconds). bin(x) counts the edges
/// at or below x, so bin(0) = 0 and everything past the last edge lands in
/// bin B-1.
struct BucketEdges {
  std::vector<double> edges;
  double max_gap = 0.0;

  int bins() const { return static_cast<int>(edges.size()) + 1; }
  int bin_of_log(double log_gap) const;
  int bin_of_gap(double gap_seconds) const;
};

/// Quantile by nearest rank: the ceil(q * n)-th smallest value.
double nearest_rank_quantile(std::vector<double> values, double q);

/// Equally spaced edges in [0, log(1 + max_gap)], where max_gap is the
/// 99.5th percentile of consecutive inter-event gaps in `train_views`.
BucketEdges calibrate_buckets(std::span<const HorizonView> train_views, int bins);

BucketEdges edges_from_max_gap(double max_gap, int bins);

}  // namespace tet
