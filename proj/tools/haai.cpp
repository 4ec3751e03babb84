#include <unistd.h>

#include <iostream>
#include <spdlog/spdlog.h>

#include "haai/cli/cli.hpp"
#include "haai/log.hpp"

int main(int argc, char** argv) {
  haai::log().set_pattern("haai: %l: %v");
  haai::log().set_level(spdlog::level::info);
  std::vector<std::string> args(argv, argv + argc);
  // The REPL prompts only when talking to a terminal.
  if (args.size() > 1 && args[1] == "repl" && isatty(STDIN_FILENO)) args.push_back("--prompt");
  return haai::cli::main(args, std::cin, std::cout, std::cerr);
}
