#include "tet/data/event_file.hpp"

#include "tet/numeric/bytes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <string_view>

namespace tet {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

double parse_real(std::string_view s, std::size_t line, const char* field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, field, "not a finite number: '" + std::string(s) + "'");
  }
  return v;
}

std::chrono::sys_days parse_date(std::string_view s, std::size_t line) {
  int y = 0;
  unsigned m = 0, d = 0;
  auto bad = [&] { return ParseError(line, "start_date", "expected YYYY-MM-DD, got '" + std::string(s) + "'"); };
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw bad();
  auto num = [&](std::string_view part, auto& out) {
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc() || ptr != part.data() + part.size()) throw bad();
  };
  num(s.substr(0, 4), y);
  num(s.substr(5, 2), m);
  num(s.substr(8, 2), d);
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw bad();
  return std::chrono::sys_days{ymd};
}

void expect_fields(const std::vector<std::string_view>& f, std::size_t n, std::size_t line, const char* kind) {
  if (f.size() != n) {
    throw ParseError(line, kind, "expected " + std::to_string(n) + " tab-separated fields, got " +
                                     std::to_string(f.size()));
  }
}

void append_real(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

int Corpus::event_type_index(const std::string& symbol) const {
  const auto it = std::find(vocabulary.begin(), vocabulary.end(), symbol);
  if (it == vocabulary.end()) throw std::out_of_range("unknown event type '" + symbol + "'");
  return static_cast<int>(it - vocabulary.begin());
}

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Corpus parse_events(const std::string& text) {
  Corpus corpus;
  std::set<std::string> run_ids;
  std::set<std::string> enrollment_ids;
  Enrollment* current = nullptr;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }

    const auto f = split_tabs(line);
    const std::string_view tag = f[0];
    if (tag == "#vocab") {
      expect_fields(f, 2, line_no, "#vocab");
      if (f[1].empty()) throw ParseError(line_no, "symbol", "empty event type symbol");
      if (std::find(corpus.vocabulary.begin(), corpus.vocabulary.end(), f[1]) != corpus.vocabulary.end()) {
        throw ParseError(line_no, "symbol", "duplicate event type '" + std::string(f[1]) + "'");
      }
      corpus.vocabulary.emplace_back(f[1]);
    } else if (tag == "#run") {
      expect_fields(f, 3, line_no, "#run");
      if (!run_ids.insert(std::string(f[1])).second) {
        throw ParseError(line_no, "course_run_id", "duplicate run '" + std::string(f[1]) + "'");
      }
      corpus.runs.push_back(CourseRun{std::string(f[1]), parse_date(f[2], line_no)});
    } else if (tag == "E") {
      expect_fields(f, 4, line_no, "E");
      Enrollment e;
      e.enrollment_id = std::string(f[1]);
      e.course_run_id = std::string(f[2]);
      if (!enrollment_ids.insert(e.enrollment_id).second) {
        throw ParseError(line_no, "enrollment_id", "duplicate enrollment '" + e.enrollment_id + "'");
      }
      if (!run_ids.count(e.course_run_id)) {
        throw ParseError(line_no, "course_run_id", "undeclared run '" + e.course_run_id + "'");
      }
      e.label = parse_real(f[3], line_no, "label");
      if (e.label < 1.0 || e.label > 5.0) throw ParseError(line_no, "label", "label outside [1,5]");
      corpus.enrollments.push_back(std::move(e));
      current = &corpus.enrollments.back();
    } else if (tag == "V") {
      expect_fields(f, 3, line_no, "V");
      if (!current) throw ParseError(line_no, "V", "event before any E line");
      const auto it = std::find(corpus.vocabulary.begin(), corpus.vocabulary.end(), f[1]);
      if (it == corpus.vocabulary.end()) {
        throw ParseError(line_no, "event_type", "unknown event type '" + std::string(f[1]) + "'");
      }
      const double ts = parse_real(f[2], line_no, "timestamp");
      if (ts < 0.0) throw ParseError(line_no, "timestamp", "negative timestamp");
      if (!current->events.empty() && ts < current->events.back().timestamp) {
        throw ParseError(line_no, "timestamp", "events out of chronological order");
      }
      current->events.push_back(EventRecord{static_cast<int>(it - corpus.vocabulary.begin()), ts});
    } else if (tag == "S") {
      expect_fields(f, 3, line_no, "S");
      if (!current) throw ParseError(line_no, "S", "snippet before any E line");
      if (f[1].empty()) throw ParseError(line_no, "snippet_id", "empty snippet id");
      const double ts = parse_real(f[2], line_no, "timestamp");
      if (ts < 0.0) throw ParseError(line_no, "timestamp", "negative timestamp");
      current->snippets.push_back(TextSnippetRef{std::string(f[1]), ts});
    } else {
      throw ParseError(line_no, "tag", "unrecognized line tag '" + std::string(tag) + "'");
    }
  }
  return corpus;
}

std::string format_events(const Corpus& corpus) {
  std::string out;
  for (const auto& v : corpus.vocabulary) out += "#vocab\t" + v + "\n";
  for (const auto& r : corpus.runs) out += "#run\t" + r.course_run_id + "\t" + format_date(r.start) + "\n";
  for (const auto& e : corpus.enrollments) {
    out += "E\t" + e.enrollment_id + "\t" + e.course_run_id + "\t";
    append_real(out, e.label);
    out += '\n';
    for (const auto& ev : e.events) {
      out += "V\t" + corpus.vocabulary.at(static_cast<std::size_t>(ev.event_type)) + "\t";
      append_real(out, ev.timestamp);
      out += '\n';
    }
    for (const auto& s : e.snippets) {
      out += "S\t" + s.snippet_id + "\t";
      append_real(out, s.timestamp);
      out += '\n';
    }
  }
  return out;
}

Corpus load_events(const std::filesystem::path& path) { return parse_events(bytes::read_file(path)); }

void store_events(const Corpus& corpus, const std::filesystem::path& path) {
  bytes::write_file(path, format_events(corpus));
}

}  // namespace tet
