#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "haai/core/json.hpp"
#include "haai/core/model.hpp"
#include "haai/syntax/ast.hpp"

namespace haai::analysis {

enum class Tier { Strong, Eventual, Weak };

std::string_view to_string(Tier tier);
/// Exit status used by `haai check`: 0, 3, 4.
int exit_code(Tier tier);

struct FeatureReport {
  bool uses_trampolines = false;
  bool uses_conditionals = false;
  bool uses_dynamic_operators = false;
  std::vector<std::vector<std::string>> recursion_cycles;
  std::size_t rho_count = 0;
  std::vector<SourceSpan> self_application_sites;
  std::vector<std::string> non_constant_time_primitives;
  /// Program reactors plus library reactors reachable from the program.
  std::vector<std::string> reactors;
};

struct Classification {
  Tier tier = Tier::Strong;
  std::vector<std::string> justification;
  FeatureReport features;

  Json to_json() const;
  std::string to_text() const;
};

/// Library reactors (prelude, primitives) are resolved through `library`
/// and analyzed when the program references them, directly or not.
Classification classify(const syntax::Program& program, const ReactorTable* library = nullptr);

/// Elementary cycles of the reactor reference graph, each rotated to start
/// at its smallest name, sorted. Enumeration stops after `limit` cycles.
std::vector<std::vector<std::string>> detect_recursion(const syntax::Program& program,
                                                       const ReactorTable* library = nullptr,
                                                       std::size_t limit = 10000);

/// Spans of every `(x x)` deployment: operator and first operand are the
/// same identifier.
std::vector<SourceSpan> detect_self_application(const syntax::Program& program);

/// DOT digraph of one reactor. Throws UnknownReactor.
std::string export_graph(const syntax::Program& program, std::string_view reactor,
                         const ReactorTable* library = nullptr);

}  // namespace haai::analysis
