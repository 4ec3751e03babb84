#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "haai/io/event_queue.hpp"

namespace haai::io {

/// JSON Lines, one `{"batch": int, "source": string, "value": json}` per
/// line. Blank lines are skipped. Throws BadScript with the line number.
std::vector<ExternalEvent> parse_script(std::string_view text, std::string_view file = "<script>");
/// Throws FileNotFound.
std::vector<ExternalEvent> load_script(const std::string& path);

std::string to_jsonl(const std::vector<ExternalEvent>& events);

}  // namespace haai::io
