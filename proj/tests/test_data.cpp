#include "tet/data/event_file.hpp"
#include "tet/data/horizon.hpp"
#include "tet/numeric/random.hpp"
#include "tet/synth/synthgen.hpp"

#include <gtest/gtest.h>

#include <chrono>

namespace tet {
namespace {

using namespace std::chrono;

constexpr const char* kSmallFile =
    "#vocab\tplay\n"
    "#vocab\tquiz\n"
    "#run\tr1\t2021-03-01\n"
    "E\te1\tr1\t4\n"
    "V\tplay\t10\n"
    "V\tquiz\t86400.5\n";

Enrollment enrollment_with(std::vector<double> event_days, std::vector<double> snippet_days = {}) {
  Enrollment e;
  e.enrollment_id = "e";
  e.course_run_id = "r";
  e.label = 3.0;
  for (double d : event_days) e.events.push_back({0, d * kSecondsPerDay});
  int k = 0;
  for (double d : snippet_days) e.snippets.push_back({"s" + std::to_string(k++), d * kSecondsPerDay});
  return e;
}

std::vector<CourseRun> runs_on_days(int n) {
  std::vector<CourseRun> runs;
  // Declared out of order on purpose.
  for (int i = n - 1; i >= 0; --i) {
    runs.push_back({"run" + std::to_string(i), sys_days{year{2020} / 1 / 1} + days{7 * i}});
  }
  return runs;
}

TEST(EventFile, ParsesOneEnrollment) {
  const Corpus c = parse_events(kSmallFile);
  ASSERT_EQ(c.enrollments.size(), 1u);
  EXPECT_EQ(c.enrollments[0].events.size(), 2u);
  EXPECT_EQ(c.enrollments[0].events[1].event_type, 1);
  EXPECT_DOUBLE_EQ(c.enrollments[0].events[1].timestamp, 86400.5);
  EXPECT_EQ(c.runs[0].start, sys_days{year{2021} / 3 / 1});
  EXPECT_DOUBLE_EQ(c.enrollments[0].label, 4.0);
}

struct BadLine {
  const char* name;
  const char* text;
  std::size_t line;
  const char* field;
};

class EventFileErrors : public ::testing::TestWithParam<BadLine> {};

TEST_P(EventFileErrors, ReportLineAndField) {
  const auto& p = GetParam();
  try {
    parse_events(p.text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), p.line) << e.what();
    EXPECT_EQ(e.field(), p.field) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Cases, EventFileErrors,
    ::testing::Values(BadLine{"NegativeTimestamp", "#vocab\ta\n#run\tr\t2020-01-01\nE\te\tr\t3\nV\ta\t-1\n", 4, "timestamp"},
                      BadLine{"UnknownEventType", "#vocab\ta\n#run\tr\t2020-01-01\nE\te\tr\t3\nV\tb\t1\n", 4, "event_type"},
                      BadLine{"OutOfOrder", "#vocab\ta\n#run\tr\t2020-01-01\nE\te\tr\t3\nV\ta\t5\nV\ta\t4\n", 5, "timestamp"},
                      BadLine{"LabelOutOfRange", "#vocab\ta\n#run\tr\t2020-01-01\nE\te\tr\t6\n", 3, "label"},
                      BadLine{"InvalidDate", "#vocab\ta\n#run\tr\t2020-02-30\n", 2, "start_date"},
                      BadLine{"UndeclaredRun", "#vocab\ta\nE\te\tr\t3\n", 2, "course_run_id"},
                      BadLine{"DuplicateEnrollment", "#vocab\ta\n#run\tr\t2020-01-01\nE\te\tr\t3\nE\te\tr\t3\n", 4, "enrollment_id"},
                      BadLine{"MissingField", "#vocab\ta\n#run\tr\t2020-01-01\nE\te\tr\n", 3, "E"},
                      BadLine{"EventBeforeEnrollment", "#vocab\ta\nV\ta\t1\n", 2, "V"},
                      BadLine{"NonNumericLabel", "#vocab\ta\n#run\tr\t2020-01-01\nE\te\tr\tx\n", 3, "label"}),
    [](const auto& info) { return std::string(info.param.name); });

TEST(EventFile, RoundTripOnFiftyEnrollments) {
  SynthConfig cfg;
  cfg.n_runs = 5;
  cfg.n_enrollments = 50;
  cfg.text_probability = 0.5;
  const Corpus c = generate(cfg).corpus;
  const std::string text = format_events(c);
  const Corpus back = parse_events(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(format_events(back), text);
}

TEST(Horizon, CutoffKeepsOnlyEarlyEvents) {
  const HorizonView v = slice_horizon(enrollment_with({3.0, 9.0}), 7);
  ASSERT_EQ(v.events.size(), 1u);
  EXPECT_DOUBLE_EQ(v.events[0].timestamp, 3.0 * kSecondsPerDay);
}

TEST(Horizon, CutoffIsInclusive) {
  const HorizonView v = slice_horizon(enrollment_with({7.0}, {7.0}), 7);
  EXPECT_EQ(v.events.size(), 1u);
  EXPECT_FALSE(v.text_missing);
  const HorizonView w = slice_horizon(enrollment_with({std::nextafter(7.0, 8.0)}), 7);
  EXPECT_TRUE(w.events.empty());
}

TEST(Horizon, EmptyEnrollment) {
  const HorizonView v = slice_horizon(enrollment_with({}), 7);
  EXPECT_TRUE(v.events.empty());
  EXPECT_TRUE(v.text_missing);
  const HorizonView w = slice_horizon(enrollment_with({}, {2.0, 10.0}), 7);
  EXPECT_FALSE(w.text_missing);
  EXPECT_EQ(w.snippet_ids, std::vector<std::string>{"s0"});
}

TEST(Horizon, PostHorizonMutationsNeverChangeViews) {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int horizon = 1 + static_cast<int>(uniform_index(rng, 28));
    const double cutoff = horizon * kSecondsPerDay;
    Enrollment e;
    e.enrollment_id = "e" + std::to_string(trial);
    e.label = 1.0 + static_cast<double>(uniform_index(rng, 5));
    double t = 0.0;
    const auto n = uniform_index(rng, 40);
    for (std::uint64_t i = 0; i < n; ++i) {
      t += uniform01(rng) * 2.0 * kSecondsPerDay;
      e.events.push_back({static_cast<int>(uniform_index(rng, 4)), t});
    }
    for (int k = 0; k < 3; ++k) e.snippets.push_back({"s" + std::to_string(k), uniform01(rng) * 40 * kSecondsPerDay});
    const std::string before = serialize_view(slice_horizon(e, horizon));

    Enrollment m = e;
    for (auto& ev : m.events) {
      if (ev.timestamp > cutoff) {
        ev.event_type = static_cast<int>(uniform_index(rng, 4));
        ev.timestamp = cutoff + (ev.timestamp - cutoff) * (0.5 + uniform01(rng));
      }
    }
    std::sort(m.events.begin(), m.events.end(),
              [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });
    const auto extra = uniform_index(rng, 5);
    for (std::uint64_t i = 0; i < extra; ++i) m.events.push_back({3, cutoff + 1.0 + static_cast<double>(i)});
    for (auto& s : m.snippets) {
      if (s.timestamp > cutoff) s.snippet_id += "_changed";
    }
    m.snippets.push_back({"late", std::nextafter(cutoff, 1e300)});
    ASSERT_EQ(serialize_view(slice_horizon(m, horizon)), before) << "trial " << trial;
  }
}

TEST(Split, TwoHundredSixtyRunCounts) {
  const auto s = split_chronological(runs_on_days(260));
  int counts[3] = {0, 0, 0};
  for (const auto& [id, split] : s) ++counts[static_cast<int>(split)];
  EXPECT_EQ(counts[0], 182);
  EXPECT_EQ(counts[1], 39);
  EXPECT_EQ(counts[2], 39);
}

TEST(Split, TenRunsEarliestSevenTrain) {
  const auto s = split_chronological(runs_on_days(10));
  for (int i = 0; i < 10; ++i) {
    const Split expected = i < 7 ? Split::kTrain : (i < 9 ? Split::kValidation : Split::kTest);
    EXPECT_EQ(s.at("run" + std::to_string(i)), expected) << i;
  }
}

TEST(Split, ThreeRunsOnePerSplit) {
  const auto s = split_chronological(runs_on_days(3));
  EXPECT_EQ(s.at("run0"), Split::kTrain);
  EXPECT_EQ(s.at("run1"), Split::kValidation);
  EXPECT_EQ(s.at("run2"), Split::kTest);
}

TEST(Split, TiesBrokenById) {
  std::vector<CourseRun> runs;
  for (const char* id : {"c", "a", "b"}) runs.push_back({id, sys_days{year{2020} / 1 / 1}});
  const auto s = split_chronological(runs);
  EXPECT_EQ(s.at("a"), Split::kTrain);
  EXPECT_EQ(s.at("b"), Split::kValidation);
  EXPECT_EQ(s.at("c"), Split::kTest);
}

TEST(Split, NoTestRunStartsBeforeATrainRun) {
  for (int n = 3; n < 60; ++n) {
    auto runs = runs_on_days(n);
    const auto s = split_chronological(runs);
    sys_days last_train = sys_days::min(), first_test = sys_days::max();
    for (const auto& r : runs) {
      if (s.at(r.course_run_id) == Split::kTrain) last_train = std::max(last_train, r.start);
      if (s.at(r.course_run_id) == Split::kTest) first_test = std::min(first_test, r.start);
    }
    EXPECT_LT(last_train, first_test) << n;
  }
}

TEST(Split, RejectsTooFewRunsAndBadFractions) {
  EXPECT_THROW(split_chronological(runs_on_days(2)), std::invalid_argument);
  EXPECT_THROW(split_chronological(runs_on_days(10), {0.7, 0.2, 0.2}), std::invalid_argument);
}

}  // namespace
}  // namespace tet
