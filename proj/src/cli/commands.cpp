#include <atomic>
#include <csignal>
#include <thread>

#include "common.hpp"
#include "haai/analysis/analysis.hpp"
#include "haai/io/replay.hpp"
#include "haai/log.hpp"

namespace haai::cli {

using detail::report;

namespace {

std::atomic<bool> interrupted{false};

extern "C" void on_sigint(int) { interrupted = true; }

}  // namespace

int cmd_run(const Config& config, std::ostream& out, std::ostream& err) {
  if (!config.program) {
    err << "run: a program path is required\n";
    return kUsage;
  }
  try {
    auto program = syntax::parse_program(detail::read_file(*config.program), *config.program);
    std::vector<io::ExternalEvent> script;
    if (config.script) script = io::load_script(*config.script);

    io::RuntimeOptions options = detail::runtime_options(config, out);
    options.live = !config.script.has_value();
    io::Runtime rt(options);
    std::ofstream trace;
    if (config.trace) {
      trace.open(*config.trace, std::ios::binary | std::ios::trunc);
      if (!trace) throw Error(ErrorCode::FileNotFound, "cannot write trace '" + *config.trace + "'");
      rt.set_trace(&trace);
    }

    rt.load(program);
    std::size_t deployed = rt.turns();
    if (config.script) {
      rt.replay(script);
    } else if (rt.adapter_count() > 0) {
      interrupted = false;
      auto previous = std::signal(SIGINT, on_sigint);
      rt.start();
      while (!interrupted && !rt.post([](io::Runtime& r) { return r.idle(); }).get()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      }
      rt.stop();
      std::signal(SIGINT, previous);
    }
    log().info("{} deployment turn(s), {} event turn(s), {} error(s)", deployed, rt.turns() - deployed,
               rt.error_count());
    return rt.error_count() > 0 ? kPoisoned : kOk;
  } catch (const Error& e) {
    report(err, e);
    return kUsage;
  }
}

int cmd_check(const Config& config, std::ostream& out, std::ostream& err) {
  if (!config.program) {
    err << "check: a program path is required\n";
    return kUsage;
  }
  try {
    auto program = syntax::parse_program(detail::read_file(*config.program), *config.program);
    ReactorTable lib = detail::library(config);
    auto c = analysis::classify(program, &lib);
    if (config.json) {
      out << c.to_json().dump(2) << "\n";
    } else {
      out << c.to_text();
    }
    return analysis::exit_code(c.tier);
  } catch (const Error& e) {
    report(err, e);
    return kUsage;
  }
}

int cmd_graph(const Config& config, std::ostream& out, std::ostream& err) {
  if (!config.reactor) {
    err << "graph: --reactor is required\n";
    return kUsage;
  }
  try {
    syntax::Program program;
    if (config.program) program = syntax::parse_program(detail::read_file(*config.program), *config.program);
    ReactorTable lib = detail::library(config);
    std::string dot = analysis::export_graph(program, *config.reactor, &lib);
    if (config.trace) {
      std::ofstream f(*config.trace, std::ios::binary | std::ios::trunc);
      if (!f) throw Error(ErrorCode::FileNotFound, "cannot write '" + *config.trace + "'");
      f << dot;
    } else {
      out << dot;
    }
    return kOk;
  } catch (const Error& e) {
    report(err, e);
    return kUsage;
  }
}

}  // namespace haai::cli
