#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "haai/error.hpp"
#include "haai/syntax/reader.hpp"

namespace haai::syntax {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

using LiteralValue = std::variant<std::int64_t, double, bool, std::string>;

struct VarRef {
  std::string name;
};

struct Literal {
  LiteralValue value;
};

/// `(operator operand...)`: deploys whatever reactor the operator denotes.
struct Deploy {
  ExprPtr op;
  std::vector<ExprPtr> operands;
};

struct If {
  ExprPtr cond;
  ExprPtr consequent;
  ExprPtr alternate;
};

struct SignalDef {
  std::vector<std::string> targets;
  ExprPtr expr;
  SourceSpan span;
};

/// Internal definitions followed by the sink expressions. `updates` holds the
/// trampoline update expressions written after the `|` of an `out` form.
struct Body {
  std::vector<SignalDef> defs;
  std::vector<ExprPtr> sinks;
  std::vector<ExprPtr> updates;
};

struct Rho {
  std::vector<std::string> params;
  Body body;
};

struct Expr {
  std::variant<VarRef, Literal, Deploy, If, Rho> node;
  SourceSpan span;

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
};

struct TrampolineDecl {
  std::string name;
  ExprPtr init;
};

struct ReactorDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<TrampolineDecl> trampolines;
  Body body;
  SourceSpan span;
};

using ReactorDefPtr = std::shared_ptr<const ReactorDef>;
using Definition = std::variant<ReactorDefPtr, SignalDef>;

struct Program {
  std::vector<Definition> definitions;

  const ReactorDef* find_reactor(std::string_view name) const;
  std::vector<ReactorDefPtr> reactors() const;
};

bool is_reserved(std::string_view name);

Program parse_program(const std::vector<Datum>& data);
Program parse_program(std::string_view text, std::string_view file = {});
ExprPtr parse_expression(const Datum& datum);
/// Parses one top-level form (used by the REPL).
Definition parse_definition(const Datum& datum);

std::string print(const Expr& expr);
std::string print(const ReactorDef& def);
std::string print(const SignalDef& def);
/// Canonical text: one definition per line; re-reading it yields the same tree.
std::string print(const Program& program);

/// Structural equality ignoring spans.
bool same_structure(const Expr& a, const Expr& b);
bool same_structure(const Program& a, const Program& b);

}  // namespace haai::syntax
