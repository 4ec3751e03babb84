#include <CLI11.hpp>

#include "haai/cli/cli.hpp"

namespace haai::cli {

int main(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Haai: reactive programming without functions", "haai"};
  app.require_subcommand(1);
  Config c;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--max-depth", c.max_depth, "Deployment nesting budget")->check(CLI::PositiveNumber);
    sub->add_option("--prelude", c.prelude, "Replace the built-in prelude")->check(CLI::ExistingFile);
    sub->add_flag("--examples", c.examples, "Also load the example library (fix)");
  };

  auto* run = app.add_subcommand("run", "Deploy a program and react to its sources");
  run->add_option("program", c.program, "Program file")->required();
  run->add_option("--script", c.script, "Replay a JSONL event script instead of live adapters");
  run->add_option("--trace,-o", c.trace, "Write the JSONL trace here");
  run->add_option("--poll-ms", c.poll_ms, "Live batching window")->check(CLI::NonNegativeNumber);
  common(run);

  auto* repl = app.add_subcommand("repl", "Interactive session");
  repl->add_option("program", c.program, "Program to load first");
  repl->add_option("--trace,-o", c.trace, "Write the JSONL trace here");
  repl->add_option("--poll-ms", c.poll_ms, "Live batching window")->check(CLI::NonNegativeNumber);
  repl->add_flag("--prompt", c.prompt)->group("");
  common(repl);

  auto* check = app.add_subcommand("check", "Classify a program's reactivity tier");
  check->add_option("program", c.program, "Program file")->required();
  check->add_flag("--json", c.json, "Print the report as JSON");
  common(check);

  auto* graph = app.add_subcommand("graph", "Print a reactor graph as DOT");
  graph->add_option("program", c.program, "Program file defining the reactor");
  graph->add_option("--reactor", c.reactor, "Reactor name")->required();
  graph->add_option("--trace,-o", c.trace, "Write the DOT here instead of stdout");
  common(graph);

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
  if (c.command == "run") return cmd_run(c, out, err);
  if (c.command == "repl") return cmd_repl(c, in, out, err);
  if (c.command == "check") return cmd_check(c, out, err);
  return cmd_graph(c, out, err);
}

}  // namespace haai::cli
