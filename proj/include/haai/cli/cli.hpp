#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace haai::cli {

struct Config {
  std::string command;  // run | repl | check | graph
  std::optional<std::string> program;
  std::optional<std::string> script;
  /// Trace JSONL for run/repl, DOT output for graph.
  std::optional<std::string> trace;
  std::uint32_t max_depth = 10000;
  std::optional<int> poll_ms;
  std::optional<std::string> prelude;
  std::optional<std::string> reactor;
  bool json = false;
  bool examples = false;
  /// Print a prompt in the REPL (set for terminals).
  bool prompt = false;
};

/// Exit codes shared by the subcommands.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;       // parse errors, missing files, bad arguments
inline constexpr int kPoisoned = 2;    // run: a deployment or turn reported an error
inline constexpr int kEventual = 3;    // check
inline constexpr int kWeak = 4;        // check

int cmd_run(const Config& config, std::ostream& out, std::ostream& err);
int cmd_repl(const Config& config, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_check(const Config& config, std::ostream& out, std::ostream& err);
int cmd_graph(const Config& config, std::ostream& out, std::ostream& err);

/// Parses arguments (argv[0] is the program name) and dispatches.
int main(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace haai::cli
