#pragma once

#include "tet/data/types.hpp"

#include <filesystem>
#include <string>

namespace tet {

// Line-delimited, tab-separated text:
//   #vocab <symbol>
//   #run <course_run_id> <YYYY-MM-DD>
//   E <enrollment_id> <course_run_id> <label>
//   V <event_type> <timestamp_seconds>
//   S <snippet_id> <timestamp_seconds>
// V and S lines attach to the most recent E line. Blank lines are ignored.

Corpus parse_events(const std::string& text);
std::string format_events(const Corpus& corpus);

Corpus load_events(const std::filesystem::path& path);
void store_events(const Corpus& corpus, const std::filesystem::path& path);

std::string format_date(std::chrono::sys_days day);

}  // namespace tet
