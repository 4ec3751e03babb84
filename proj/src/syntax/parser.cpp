#include <algorithm>
#include <set>

#include "haai/syntax/ast.hpp"

namespace haai::syntax {
namespace {

constexpr std::string_view kReserved[] = {"defr", "def", "out", "if", "rho", "|"};

std::string describe(const Datum& d) {
  if (d.is_symbol()) return "'" + d.symbol() + "'";
  if (d.is_list()) return "list";
  return "literal";
}

std::string identifier(const Datum& d, ErrorCode code, std::string_view what) {
  if (!d.is_symbol()) throw Error(code, std::string(what) + " must be an identifier, got " + describe(d), d.span);
  if (is_reserved(d.symbol())) {
    throw Error(code, std::string(what) + " cannot be the reserved word '" + d.symbol() + "'", d.span);
  }
  return d.symbol();
}

bool is_form(const Datum& d, std::string_view keyword) {
  return d.is_list() && !d.list().empty() && d.list().front().is_symbol(keyword);
}

ExprPtr make(Expr expr) { return std::make_shared<const Expr>(std::move(expr)); }

SignalDef parse_signal_def(const Datum& d) {
  const auto& items = d.list();
  if (items.size() != 3) throw Error(ErrorCode::MalformedDef, "expected (def target expression)", d.span);
  SignalDef def;
  def.span = d.span;
  const Datum& target = items[1];
  if (target.is_list()) {
    if (target.list().empty()) throw Error(ErrorCode::MalformedDef, "empty target list", target.span);
    std::set<std::string> seen;
    for (const auto& t : target.list()) {
      std::string name = identifier(t, ErrorCode::MalformedDef, "def target");
      if (!seen.insert(name).second) throw Error(ErrorCode::DuplicateParam, "duplicate target '" + name + "'", t.span);
      def.targets.push_back(std::move(name));
    }
  } else {
    def.targets.push_back(identifier(target, ErrorCode::MalformedDef, "def target"));
  }
  def.expr = parse_expression(items[2]);
  if (def.targets.size() > 1 && def.expr->as<Deploy>() == nullptr) {
    throw Error(ErrorCode::MalformedDef, "several targets need a deployment expression", d.span);
  }
  return def;
}

Body parse_body(const DatumList& forms, std::size_t first, std::size_t trampolines, ErrorCode code,
                const SourceSpan& whole) {
  if (first >= forms.size()) throw Error(code, "missing body", whole);
  Body body;
  for (std::size_t i = first; i + 1 < forms.size(); ++i) {
    const Datum& form = forms[i];
    if (is_form(form, "def")) {
      body.defs.push_back(parse_signal_def(form));
    } else if (is_form(form, "out")) {
      throw Error(ErrorCode::MisplacedKeyword, "'out' must be the last form of a body", form.span);
    } else {
      throw Error(code, "only (def ...) forms may precede the sinks", form.span);
    }
  }

  const Datum& last = forms.back();
  if (is_form(last, "def")) throw Error(code, "body has no sink expression", last.span);
  if (!is_form(last, "out")) {
    if (trampolines > 0) {
      throw Error(ErrorCode::MissingTrampolineUpdates, "trampolines need an (out sinks | updates) form", last.span);
    }
    body.sinks.push_back(parse_expression(last));
    return body;
  }

  const auto& items = last.list();
  auto bar = std::find_if(items.begin() + 1, items.end(), [](const Datum& x) { return x.is_symbol("|"); });
  for (auto it = items.begin() + 1; it != bar; ++it) body.sinks.push_back(parse_expression(*it));
  if (body.sinks.empty()) throw Error(code, "(out ...) needs at least one sink", last.span);
  if (bar == items.end()) {
    if (trampolines > 0) throw Error(ErrorCode::MissingTrampolineUpdates, "missing '| update...' in out form", last.span);
    return body;
  }
  if (trampolines == 0) throw Error(ErrorCode::BarWithoutTrampolines, "'|' in out form without trampolines", bar->span);
  for (auto it = bar + 1; it != items.end(); ++it) body.updates.push_back(parse_expression(*it));
  if (body.updates.size() < trampolines) {
    throw Error(ErrorCode::MissingTrampolineUpdates,
                "expected " + std::to_string(trampolines) + " update expressions, got " +
                    std::to_string(body.updates.size()),
                last.span);
  }
  if (body.updates.size() > trampolines) {
    throw Error(code, "more update expressions than trampolines", last.span);
  }
  return body;
}

ReactorDefPtr parse_defr(const Datum& d) {
  const auto& items = d.list();
  if (items.size() < 3 || !items[1].is_list()) {
    throw Error(ErrorCode::MalformedDefr, "expected (defr (name param...) body...)", d.span);
  }
  const auto& header = items[1].list();
  if (header.empty()) throw Error(ErrorCode::MalformedDefr, "missing reactor name", items[1].span);

  auto def = std::make_shared<ReactorDef>();
  def->span = d.span;
  def->name = identifier(header[0], ErrorCode::MalformedDefr, "reactor name");

  std::set<std::string> seen;
  std::size_t i = 1;
  for (; i < header.size() && !header[i].is_symbol("|"); ++i) {
    std::string name = identifier(header[i], ErrorCode::MalformedDefr, "parameter");
    if (!seen.insert(name).second) throw Error(ErrorCode::DuplicateParam, "duplicate parameter '" + name + "'", header[i].span);
    def->params.push_back(std::move(name));
  }
  if (def->params.empty()) throw Error(ErrorCode::MalformedDefr, "a reactor needs at least one source", items[1].span);
  if (i < header.size()) {
    const Datum& bar = header[i];
    if (i + 1 == header.size()) throw Error(ErrorCode::BarWithoutTrampolines, "'|' not followed by trampolines", bar.span);
    for (++i; i < header.size(); ++i) {
      const Datum& decl = header[i];
      if (!decl.is_list() || decl.list().size() != 2) {
        throw Error(ErrorCode::MalformedDefr, "trampoline must be (name init-expression)", decl.span);
      }
      std::string name = identifier(decl.list()[0], ErrorCode::MalformedDefr, "trampoline name");
      if (!seen.insert(name).second) throw Error(ErrorCode::DuplicateParam, "duplicate name '" + name + "'", decl.span);
      def->trampolines.push_back(TrampolineDecl{std::move(name), parse_expression(decl.list()[1])});
    }
  }
  def->body = parse_body(items, 2, def->trampolines.size(), ErrorCode::MalformedDefr, d.span);
  return def;
}

ExprPtr parse_rho(const Datum& d) {
  const auto& items = d.list();
  if (items.size() < 3 || !items[1].is_list()) throw Error(ErrorCode::MalformedRho, "expected (rho (param...) body...)", d.span);
  Rho rho;
  std::set<std::string> seen;
  for (const auto& p : items[1].list()) {
    std::string name = identifier(p, ErrorCode::MalformedRho, "rho parameter");
    if (!seen.insert(name).second) throw Error(ErrorCode::DuplicateParam, "duplicate parameter '" + name + "'", p.span);
    rho.params.push_back(std::move(name));
  }
  rho.body = parse_body(items, 2, 0, ErrorCode::MalformedRho, d.span);
  return make(Expr{std::move(rho), d.span});
}

}  // namespace

bool is_reserved(std::string_view name) {
  return std::find(std::begin(kReserved), std::end(kReserved), name) != std::end(kReserved);
}

const ReactorDef* Program::find_reactor(std::string_view name) const {
  for (const auto& d : definitions) {
    if (const auto* r = std::get_if<ReactorDefPtr>(&d); r != nullptr && (*r)->name == name) return r->get();
  }
  return nullptr;
}

std::vector<ReactorDefPtr> Program::reactors() const {
  std::vector<ReactorDefPtr> out;
  for (const auto& d : definitions) {
    if (const auto* r = std::get_if<ReactorDefPtr>(&d)) out.push_back(*r);
  }
  return out;
}

ExprPtr parse_expression(const Datum& d) {
  return std::visit(
      [&](const auto& v) -> ExprPtr {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Symbol>) {
          if (is_reserved(v.name)) throw Error(ErrorCode::MisplacedKeyword, "'" + v.name + "' is not an expression", d.span);
          return make(Expr{VarRef{v.name}, d.span});
        } else if constexpr (std::is_same_v<T, DatumList>) {
          if (v.empty()) throw Error(ErrorCode::EmptyDeploy, "() is not a deployment", d.span);
          const Datum& head = v.front();
          if (head.is_symbol("if")) {
            if (v.size() != 4) throw Error(ErrorCode::MalformedIf, "if takes exactly three expressions", d.span);
            return make(Expr{If{parse_expression(v[1]), parse_expression(v[2]), parse_expression(v[3])}, d.span});
          }
          if (head.is_symbol("rho")) return parse_rho(d);
          if (head.is_symbol() && is_reserved(head.symbol())) {
            throw Error(ErrorCode::MisplacedKeyword, "'" + head.symbol() + "' is not allowed here", head.span);
          }
          Deploy deploy;
          deploy.op = parse_expression(head);
          for (std::size_t i = 1; i < v.size(); ++i) deploy.operands.push_back(parse_expression(v[i]));
          return make(Expr{std::move(deploy), d.span});
        } else {
          return make(Expr{Literal{LiteralValue(v)}, d.span});
        }
      },
      d.value);
}

Definition parse_definition(const Datum& d) {
  if (is_form(d, "defr")) return parse_defr(d);
  if (is_form(d, "def")) return parse_signal_def(d);
  throw Error(ErrorCode::NotADefinition, "top-level forms must be (defr ...) or (def ...)", d.span);
}

Program parse_program(const std::vector<Datum>& data) {
  Program program;
  std::set<std::string> reactors;
  for (const auto& d : data) {
    Definition def = parse_definition(d);
    if (const auto* r = std::get_if<ReactorDefPtr>(&def)) {
      if (!reactors.insert((*r)->name).second) {
        throw Error(ErrorCode::DuplicateReactor, "reactor '" + (*r)->name + "' defined twice", d.span);
      }
    }
    program.definitions.push_back(std::move(def));
  }
  return program;
}

Program parse_program(std::string_view text, std::string_view file) {
  return parse_program(read_data(text, file));
}

}  // namespace haai::syntax
