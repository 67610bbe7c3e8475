#pragma once

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tet {

inline constexpr double kSecondsPerDay = 86400.0;

/// One timestamped behavioral event. The type is an index into the
/// corpus vocabulary; the timestamp is seconds since course-run start.
struct EventRecord {
  int event_type = 0;
  double timestamp = 0.0;

  bool operator==(const EventRecord&) const = default;
};

struct TextSnippetRef {
  std::string snippet_id;
  double timestamp = 0.0;

  bool operator==(const TextSnippetRef&) const = default;
};

struct Enrollment {
  std::string enrollment_id;
  std::string course_run_id;
  double label = 0.0;
  std::vector<EventRecord> events;  // sorted by timestamp
  std::vector<TextSnippetRef> snippets;

  bool operator==(const Enrollment&) const = default;
};

struct CourseRun {
  std::string course_run_id;
  std::chrono::sys_days start;

  bool operator==(const CourseRun&) const = default;
};

/// Everything an event file declares.
struct Corpus {
  std::vector<std::string> vocabulary;
  std::vector<CourseRun> runs;
  std::vector<Enrollment> enrollments;

  int event_type_index(const std::string& symbol) const;

  bool operator==(const Corpus&) const = default;
};

/// Leakage-safe projection of an enrollment at a horizon.
struct HorizonView {
  std::string enrollment_id;
  int horizon_days = 0;
  std::vector<EventRecord> events;
  std::vector<std::string> snippet_ids;
  bool text_missing = true;
  double label = 0.0;

  bool operator==(const HorizonView&) const = default;
};

enum class Split { kTrain, kValidation, kTest };

using SplitAssignment = std::map<std::string, Split>;

struct SplitFractions {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

const char* to_string(Split s);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", field '" + field + "': " + message),
        line_(line), field_(std::move(field)) {}

  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace tet
