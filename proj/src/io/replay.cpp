#include "haai/io/replay.hpp"

#include <fstream>
#include <sstream>

#include "haai/core/json.hpp"
#include "haai/error.hpp"

namespace haai::io {

std::vector<ExternalEvent> parse_script(std::string_view text, std::string_view file) {
  std::vector<ExternalEvent> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::uint32_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SourceSpan span{std::string(file), lineno, 1, static_cast<std::uint32_t>(line.size())};
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::BadScript, "line is not a JSON object", span);
    if (!j.contains("batch") || !j["batch"].is_number_integer() || j["batch"].get<std::int64_t>() < 0) {
      throw Error(ErrorCode::BadScript, "'batch' must be a non-negative integer", span);
    }
    if (!j.contains("source") || !j["source"].is_string()) {
      throw Error(ErrorCode::BadScript, "'source' must be a string", span);
    }
    if (!j.contains("value")) throw Error(ErrorCode::BadScript, "'value' is missing", span);
    ExternalEvent e;
    e.batch = j["batch"].get<std::uint64_t>();
    e.source = j["source"].get<std::string>();
    try {
      e.value = value_from_json(j["value"]);
    } catch (const Error& err) {
      throw Error(ErrorCode::BadScript, err.detail(), span);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ExternalEvent> load_script(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open script '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_script(buf.str(), path);
}

std::string to_jsonl(const std::vector<ExternalEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    Json j;
    j["batch"] = e.batch;
    j["source"] = e.source;
    j["value"] = to_json(e.value);
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace haai::io
