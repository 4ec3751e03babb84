#include <atomic>

#include "haai/core/model.hpp"

namespace haai {

std::string_view to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::Source: return "source";
    case SignalKind::Constant: return "constant";
    case SignalKind::Primitive: return "primitive";
    case SignalKind::Trampoline: return "trampoline";
    case SignalKind::Conditional: return "conditional";
    case SignalKind::Dynamic: return "dynamic";
    case SignalKind::Projection: return "projection";
    case SignalKind::Mirror: return "mirror";
    case SignalKind::Placeholder: return "placeholder";
  }
  return "?";
}

std::string path_of(const Deployment& d) {
  std::vector<const std::string*> parts;
  for (const Deployment* p = &d; p != nullptr; p = p->parent) {
    if (!p->segment.empty()) parts.push_back(&p->segment);
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!out.empty()) out += '/';
    out += **it;
  }
  return out;
}

std::string path_of(const Signal& s) {
  const Deployment* base = s.renamed ? s.name_base : s.owner;
  if (s.renamed && base != nullptr && base->kind == DeploymentKind::Global) return s.label;
  std::string out = base != nullptr ? path_of(*base) : std::string();
  if (!s.label.empty()) {
    if (!out.empty()) out += '/';
    out += s.label;
  }
  return out;
}

Environment::Environment() : frame_(std::make_shared<Frame>()) {}

Environment Environment::extend() const {
  auto frame = std::make_shared<Frame>();
  frame->parent = frame_;
  return Environment(std::move(frame));
}

void Environment::bind(const std::string& name, Binding binding) {
  // Copies share frames; give this copy its own before writing.
  if (frame_.use_count() > 1) frame_ = std::make_shared<Frame>(*frame_);
  frame_->bindings.insert_or_assign(name, std::move(binding));
}

const Binding* Environment::find(std::string_view name) const {
  for (const Frame* f = frame_.get(); f != nullptr; f = f->parent.get()) {
    if (auto it = f->bindings.find(name); it != f->bindings.end()) return &it->second;
  }
  return nullptr;
}

Environment Environment::from_bindings(Bindings bindings) {
  auto frame = std::make_shared<Frame>();
  frame->bindings = std::move(bindings);
  return Environment(std::move(frame));
}

bool ReactorTable::define(const std::string& name, ReactorValue value) {
  auto [it, inserted] = entries_.insert_or_assign(name, std::move(value));
  return !inserted;
}

const ReactorValue* ReactorTable::find(std::string_view name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> ReactorTable::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

Binding lookup(const Environment& env, const ReactorTable& table, std::string_view name, const SourceSpan& span) {
  if (const Binding* b = env.find(name)) return *b;
  if (const ReactorValue* r = table.find(name)) return *r;
  throw Error(ErrorCode::UnboundIdentifier, "unbound identifier '" + std::string(name) + "'", span);
}

namespace {

void collect(const syntax::Expr& expr, std::set<std::string>& bound, std::set<std::string>& out);

void collect_body(const syntax::Body& body, std::set<std::string> bound, std::set<std::string>& out) {
  for (const auto& def : body.defs) {
    collect(*def.expr, bound, out);
    bound.insert(def.targets.begin(), def.targets.end());
  }
  for (const auto& e : body.sinks) collect(*e, bound, out);
  for (const auto& e : body.updates) collect(*e, bound, out);
}

void collect(const syntax::Expr& expr, std::set<std::string>& bound, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, syntax::VarRef>) {
          if (!bound.contains(n.name)) out.insert(n.name);
        } else if constexpr (std::is_same_v<T, syntax::Deploy>) {
          collect(*n.op, bound, out);
          for (const auto& o : n.operands) collect(*o, bound, out);
        } else if constexpr (std::is_same_v<T, syntax::If>) {
          collect(*n.cond, bound, out);
          collect(*n.consequent, bound, out);
          collect(*n.alternate, bound, out);
        } else if constexpr (std::is_same_v<T, syntax::Rho>) {
          std::set<std::string> inner = bound;
          inner.insert(n.params.begin(), n.params.end());
          collect_body(n.body, std::move(inner), out);
        }
      },
      expr.node);
}

}  // namespace

std::set<std::string> free_identifiers(const syntax::Rho& rho) {
  std::set<std::string> out;
  collect_body(rho.body, std::set<std::string>(rho.params.begin(), rho.params.end()), out);
  return out;
}

Value make_capture(const syntax::ExprPtr& rho_expr, const Environment& env, const ReactorTable& table) {
  static std::atomic<std::uint64_t> serial{0};
  const auto& rho = std::get<syntax::Rho>(rho_expr->node);
  auto capture = std::make_shared<Capture>();
  capture->rho_expr = rho_expr;
  capture->serial = ++serial;
  for (const auto& name : free_identifiers(rho)) {
    capture->snapshot.emplace(name, lookup(env, table, name, rho_expr->span));
  }
  return Value(ReactorValue::capture(std::move(capture)));
}

}  // namespace haai
