#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "haai/engine/engine.hpp"
#include "haai/stdlib/stdlib.hpp"

namespace haai::test {

/// Engine with the standard library installed and a program loaded.
struct Harness {
  Engine engine;
  std::vector<TurnReport> deploy_reports;

  explicit Harness(std::string_view program = {}, EngineOptions options = {}, bool examples = false)
      : engine(options) {
    stdlib::install(engine.table());
    if (examples) stdlib::load_examples(engine.table());
    if (!program.empty()) load(program);
  }

  void load(std::string_view program) {
    auto reports = engine.load(syntax::parse_program(program));
    deploy_reports.insert(deploy_reports.end(), reports.begin(), reports.end());
  }

  Signal* sig(const std::string& name) const {
    Signal* s = engine.global(name);
    if (s == nullptr) throw std::runtime_error("no global " + name);
    return s;
  }

  TurnReport inject(const std::vector<std::pair<std::string, Value>>& events) {
    Batch batch;
    for (const auto& [name, v] : events) batch.push_back({sig(name), v});
    return engine.run_turn(batch);
  }

  std::optional<Value> value(const std::string& name) const { return sig(name)->value; }
};

inline bool has_error(const TurnReport& r, ErrorCode code) {
  for (const auto& e : r.errors) {
    if (e.code == code) return true;
  }
  return false;
}

/// Iterative Collatz: number of steps to reach 1.
inline std::int64_t collatz_steps(std::int64_t n) {
  std::int64_t c = 0;
  while (n != 1) {
    n = n % 2 == 0 ? n / 2 : 3 * n + 1;
    ++c;
  }
  return c;
}

}  // namespace haai::test
