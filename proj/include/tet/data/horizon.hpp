#pragma once

#include "tet/data/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace tet {

/// Keeps events and snippets with timestamp <= horizon_days * 86400.
HorizonView slice_horizon(const Enrollment& enrollment, int horizon_days);

/// Canonical byte encoding, used to compare views for equality.
std::string serialize_view(const HorizonView& view);

/// Sorts runs by (start date, id); the first ceil(train*N) go to train, the
/// next ceil(validation*N) to validation, the remainder to test. Every split
/// receives at least one run.
SplitAssignment split_chronological(std::vector<CourseRun> runs,
                                    const SplitFractions& fractions = {});

struct SplitViews {
  std::vector<HorizonView> train;
  std::vector<HorizonView> validation;
  std::vector<HorizonView> test;
};

SplitViews make_split_views(const Corpus& corpus, const SplitAssignment& splits, int horizon_days);

}  // namespace tet
