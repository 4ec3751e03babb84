#include <sstream>

#include "common.hpp"
#include "haai/analysis/analysis.hpp"
#include "haai/core/json.hpp"

namespace haai::cli {

using detail::report;

namespace {

/// Open parentheses not yet closed, ignoring strings and comments.
int paren_depth(std::string_view text) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      --depth;
    }
  }
  return depth;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

/// JSON first (arrays become vectors), then a Haai literal such as #t.
Value parse_value(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (!j.is_discarded()) return value_from_json(j);
  auto data = syntax::read_data(text, "<inject>");
  if (data.size() == 1) {
    auto expr = syntax::parse_expression(data.front());
    if (const auto* lit = expr->as<syntax::Literal>()) return Value::from_literal(lit->value);
  }
  throw Error(ErrorCode::BadPayload, "cannot read a value from '" + text + "'");
}

class Session {
 public:
  Session(const Config& config, std::ostream& out, std::ostream& err)
      : config_(config), out_(out), err_(err), rt_(options(config, out)) {
    if (config.trace) {
      trace_.open(*config.trace, std::ios::binary | std::ios::trunc);
      if (!trace_) throw Error(ErrorCode::FileNotFound, "cannot write trace '" + *config.trace + "'");
      rt_.set_trace(&trace_);
    }
    rt_.on_report([this](const TurnReport& r) { echo(r); });
    rt_.start();
  }
  ~Session() { rt_.stop(); }

  void load(std::string_view text, std::string_view file) {
    syntax::Program piece;
    for (const auto& d : syntax::read_data(text, file)) piece.definitions.push_back(syntax::parse_definition(d));
    rt_.post([&](io::Runtime& r) {
         r.load(piece);
         session_.definitions.insert(session_.definitions.end(), piece.definitions.begin(), piece.definitions.end());
       })
        .get();
  }

  /// Returns false on :quit.
  bool command(const std::string& line) {
    std::istringstream words(line);
    std::string cmd, arg;
    words >> cmd >> arg;
    std::string rest;
    std::getline(words, rest);
    rest = trim(rest);

    if (cmd == ":quit") return false;
    if (cmd == ":inject") {
      if (arg.empty() || rest.empty()) throw Error(ErrorCode::BadPayload, "usage: :inject <source> <value>");
      Value v = parse_value(rest);
      rt_.post([&](io::Runtime& r) {
           if (r.engine().sources(arg).empty()) {
             throw Error(ErrorCode::NotASource, "'" + arg + "' is not a declared source");
           }
           r.run_batch({{arg, v, 0}});
         })
          .get();
    } else if (cmd == ":trace") {
      if (arg != "on" && arg != "off") throw Error(ErrorCode::BadPayload, "usage: :trace on|off");
      rt_.post([&](io::Runtime&) { echo_trace_ = arg == "on"; }).get();
    } else if (cmd == ":graph") {
      if (arg.empty()) throw Error(ErrorCode::UnknownReactor, "usage: :graph <reactor>");
      rt_.post([&](io::Runtime& r) { out_ << analysis::export_graph(session_, arg, &r.engine().table()); }).get();
    } else if (cmd == ":check") {
      rt_.post([&](io::Runtime& r) { out_ << analysis::classify(session_, &r.engine().table()).to_text(); }).get();
    } else {
      err_ << "unknown command " << cmd << " (try :inject, :trace, :graph, :check, :quit)\n";
    }
    return true;
  }

  void prompt() {
    if (config_.prompt) rt_.post([&](io::Runtime&) { out_ << "> " << std::flush; }).get();
  }

 private:
  static io::RuntimeOptions options(const Config& config, std::ostream& out) {
    io::RuntimeOptions o = detail::runtime_options(config, out);
    o.stdin_lines = false;
    return o;
  }

  // Runs on the executor.
  void echo(const TurnReport& r) {
    for (const auto& ev : r.events) {
      if (ev.kind != TraceEvent::Kind::Emit || ev.signal == nullptr || !ev.data || ev.name_path.empty()) continue;
      if (rt_.engine().global(ev.name_path) == ev.signal) out_ << ev.name_path << " = " << display(*ev.data) << "\n";
    }
    for (const auto& e : r.errors) err_ << "error: " << to_string(e.code) << ": " << e.message << "\n";
    if (echo_trace_) out_ << r.to_jsonl();
    out_.flush();
  }

  const Config& config_;
  std::ostream& out_;
  std::ostream& err_;
  std::ofstream trace_;
  io::Runtime rt_;
  syntax::Program session_;
  bool echo_trace_ = false;
};

}  // namespace

int cmd_repl(const Config& config, std::istream& in, std::ostream& out, std::ostream& err) {
  std::unique_ptr<Session> session;
  try {
    session = std::make_unique<Session>(config, out, err);
    if (config.program) session->load(detail::read_file(*config.program), *config.program);
  } catch (const Error& e) {
    report(err, e);
    return kUsage;
  }

  std::string buffer, line;
  session->prompt();
  while (std::getline(in, line)) {
    std::string t = trim(line);
    try {
      if (buffer.empty() && !t.empty() && t.front() == ':') {
        if (!session->command(t)) break;
      } else {
        buffer += line;
        buffer += '\n';
        if (paren_depth(buffer) > 0) continue;
        std::string text = std::move(buffer);
        buffer.clear();
        if (!trim(text).empty()) session->load(text, "<repl>");
      }
    } catch (const Error& e) {
      buffer.clear();
      report(err, e);
    }
    session->prompt();
  }
  if (!trim(buffer).empty()) {
    try {
      session->load(buffer, "<repl>");
    } catch (const Error& e) {
      report(err, e);
    }
  }
  return kOk;
}

}  // namespace haai::cli
