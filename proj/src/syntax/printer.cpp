#include <charconv>
#include <cstring>

#include "haai/syntax/ast.hpp"

namespace haai::syntax {
namespace {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string out(buf, ptr);
  if (out.find_first_of(".eEn") == std::string::npos) out += ".0";
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out + '"';
}

std::string print_literal(const LiteralValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, double>) return format_double(x);
        else if constexpr (std::is_same_v<T, bool>) return x ? "#t" : "#f";
        else return quote(x);
      },
      v);
}

std::string print_body(const Body& body) {
  std::string out;
  for (const auto& d : body.defs) out += " " + print(d);
  if (body.sinks.size() == 1 && body.updates.empty()) return out + " " + print(*body.sinks.front());
  out += " (out";
  for (const auto& s : body.sinks) out += " " + print(*s);
  if (!body.updates.empty()) {
    out += " |";
    for (const auto& u : body.updates) out += " " + print(*u);
  }
  return out + ")";
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ' ';
    out += n;
  }
  return out;
}

bool same_body(const Body& a, const Body& b);

bool same_list(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_structure(*a[i], *b[i])) return false;
  }
  return true;
}

bool same_def(const SignalDef& a, const SignalDef& b) {
  return a.targets == b.targets && same_structure(*a.expr, *b.expr);
}

bool same_body(const Body& a, const Body& b) {
  if (a.defs.size() != b.defs.size()) return false;
  for (std::size_t i = 0; i < a.defs.size(); ++i) {
    if (!same_def(a.defs[i], b.defs[i])) return false;
  }
  return same_list(a.sinks, b.sinks) && same_list(a.updates, b.updates);
}

bool same_literal(const LiteralValue& a, const LiteralValue& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<double>(&a)) {
    // Bitwise comparison so that the round-trip check is exact.
    double y = std::get<double>(b);
    return std::memcmp(x, &y, sizeof y) == 0;
  }
  return a == b;
}

}  // namespace

std::string print(const Expr& expr) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarRef>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, Literal>) {
          return print_literal(n.value);
        } else if constexpr (std::is_same_v<T, Deploy>) {
          std::string out = "(" + print(*n.op);
          for (const auto& o : n.operands) out += " " + print(*o);
          return out + ")";
        } else if constexpr (std::is_same_v<T, If>) {
          return "(if " + print(*n.cond) + " " + print(*n.consequent) + " " + print(*n.alternate) + ")";
        } else {
          return "(rho (" + join(n.params) + ")" + print_body(n.body) + ")";
        }
      },
      expr.node);
}

std::string print(const SignalDef& def) {
  std::string target = def.targets.size() == 1 ? def.targets.front() : "(" + join(def.targets) + ")";
  return "(def " + target + " " + print(*def.expr) + ")";
}

std::string print(const ReactorDef& def) {
  std::string out = "(defr (" + def.name + " " + join(def.params);
  if (!def.trampolines.empty()) {
    out += " |";
    for (const auto& t : def.trampolines) out += " (" + t.name + " " + print(*t.init) + ")";
  }
  return out + ")" + print_body(def.body) + ")";
}

std::string print(const Program& program) {
  std::string out;
  for (const auto& d : program.definitions) {
    if (const auto* r = std::get_if<ReactorDefPtr>(&d)) out += print(**r);
    else out += print(std::get<SignalDef>(d));
    out += '\n';
  }
  return out;
}

bool same_structure(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, VarRef>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, Literal>) {
          return same_literal(x.value, y.value);
        } else if constexpr (std::is_same_v<T, Deploy>) {
          return same_structure(*x.op, *y.op) && same_list(x.operands, y.operands);
        } else if constexpr (std::is_same_v<T, If>) {
          return same_structure(*x.cond, *y.cond) && same_structure(*x.consequent, *y.consequent) &&
                 same_structure(*x.alternate, *y.alternate);
        } else {
          return x.params == y.params && same_body(x.body, y.body);
        }
      },
      a.node);
}

bool same_structure(const Program& a, const Program& b) {
  if (a.definitions.size() != b.definitions.size()) return false;
  for (std::size_t i = 0; i < a.definitions.size(); ++i) {
    const auto& x = a.definitions[i];
    const auto& y = b.definitions[i];
    if (x.index() != y.index()) return false;
    if (const auto* rx = std::get_if<ReactorDefPtr>(&x)) {
      const auto& l = **rx;
      const auto& r = *std::get<ReactorDefPtr>(y);
      if (l.name != r.name || l.params != r.params || l.trampolines.size() != r.trampolines.size()) return false;
      for (std::size_t t = 0; t < l.trampolines.size(); ++t) {
        if (l.trampolines[t].name != r.trampolines[t].name ||
            !same_structure(*l.trampolines[t].init, *r.trampolines[t].init)) {
          return false;
        }
      }
      if (!same_body(l.body, r.body)) return false;
    } else if (!same_def(std::get<SignalDef>(x), std::get<SignalDef>(y))) {
      return false;
    }
  }
  return true;
}

}  // namespace haai::syntax
