#pragma once

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "haai/cli/cli.hpp"
#include "haai/error.hpp"
#include "haai/io/runtime.hpp"
#include "haai/stdlib/stdlib.hpp"

namespace haai::cli::detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path + "'");
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void report(std::ostream& err, const Error& e) {
  if (!e.span().file.empty()) err << e.span().to_string() << ": ";
  err << to_string(e.code()) << ": " << e.detail() << "\n";
}

inline io::RuntimeOptions runtime_options(const Config& c, std::ostream& out) {
  io::RuntimeOptions o;
  o.engine.depth_budget = c.max_depth;
  if (c.poll_ms) o.poll = std::chrono::milliseconds(*c.poll_ms);
  o.out = &out;
  o.examples = c.examples;
  if (c.prelude) o.prelude = read_file(*c.prelude);
  return o;
}

/// The reactor table a program is checked against.
inline ReactorTable library(const Config& c) {
  ReactorTable t;
  stdlib::register_primitives(t);
  stdlib::register_io_reactors(t);
  if (c.prelude) {
    stdlib::load_source(t, read_file(*c.prelude), *c.prelude);
  } else {
    stdlib::load_prelude(t);
  }
  if (c.examples) stdlib::load_examples(t);
  return t;
}

}  // namespace haai::cli::detail
