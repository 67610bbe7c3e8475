#include "tet/data/horizon.hpp"

#include "tet/numeric/bytes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tet {

HorizonView slice_horizon(const Enrollment& enrollment, int horizon_days) {
  if (horizon_days <= 0) throw std::invalid_argument("horizon_days must be positive");
  const double cutoff = horizon_days * kSecondsPerDay;
  HorizonView view;
  view.enrollment_id = enrollment.enrollment_id;
  view.horizon_days = horizon_days;
  view.label = enrollment.label;
  for (const auto& ev : enrollment.events) {
    if (ev.timestamp > cutoff) break;
    view.events.push_back(ev);
  }
  for (const auto& s : enrollment.snippets) {
    if (s.timestamp <= cutoff) view.snippet_ids.push_back(s.snippet_id);
  }
  view.text_missing = view.snippet_ids.empty();
  return view;
}

std::string serialize_view(const HorizonView& view) {
  std::string out;
  bytes::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(view.enrollment_id.size()));
  out += view.enrollment_id;
  bytes::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(view.horizon_days));
  bytes::put_f64(out, view.label);
  bytes::put_uint<std::uint8_t>(out, view.text_missing ? 1 : 0);
  bytes::put_uint<std::uint64_t>(out, view.events.size());
  for (const auto& ev : view.events) {
    bytes::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(ev.event_type));
    bytes::put_f64(out, ev.timestamp);
  }
  bytes::put_uint<std::uint64_t>(out, view.snippet_ids.size());
  for (const auto& id : view.snippet_ids) {
    bytes::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out += id;
  }
  return out;
}

SplitAssignment split_chronological(std::vector<CourseRun> runs, const SplitFractions& fractions) {
  if (runs.size() < 3) {
    throw std::invalid_argument("chronological split needs at least 3 course runs, got " +
                                std::to_string(runs.size()));
  }
  const double total = fractions.train + fractions.validation + fractions.test;
  if (std::abs(total - 1.0) > 1e-9 || fractions.train <= 0 || fractions.validation <= 0 || fractions.test <= 0) {
    throw std::invalid_argument("split fractions must be positive and sum to 1");
  }
  std::sort(runs.begin(), runs.end(), [](const CourseRun& a, const CourseRun& b) {
    return a.start != b.start ? a.start < b.start : a.course_run_id < b.course_run_id;
  });
  const auto n = runs.size();
  // The epsilon keeps products like 0.7 * 10 from rounding up past an integer.
  auto ceil_frac = [n](double f) { return static_cast<std::size_t>(std::ceil(f * static_cast<double>(n) - 1e-9)); };
  const std::size_t n_train = std::min(ceil_frac(fractions.train), n - 2);
  const std::size_t n_val = std::max<std::size_t>(1, std::min(ceil_frac(fractions.validation), n - n_train - 1));

  SplitAssignment out;
  for (std::size_t i = 0; i < n; ++i) {
    const Split s = i < n_train ? Split::kTrain : (i < n_train + n_val ? Split::kValidation : Split::kTest);
    out.emplace(runs[i].course_run_id, s);
  }
  return out;
}

SplitViews make_split_views(const Corpus& corpus, const SplitAssignment& splits, int horizon_days) {
  SplitViews out;
  for (const auto& e : corpus.enrollments) {
    const auto it = splits.find(e.course_run_id);
    if (it == splits.end()) throw std::invalid_argument("run " + e.course_run_id + " has no split");
    auto view = slice_horizon(e, horizon_days);
    switch (it->second) {
      case Split::kTrain: out.train.push_back(std::move(view)); break;
      case Split::kValidation: out.validation.push_back(std::move(view)); break;
      case Split::kTest: out.test.push_back(std::move(view)); break;
    }
  }
  return out;
}

}  // namespace tet
