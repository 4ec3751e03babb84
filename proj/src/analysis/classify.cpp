#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "haai/analysis/analysis.hpp"
#include "universe.hpp"

namespace haai::analysis {

std::string_view to_string(Tier tier) {
  switch (tier) {
    case Tier::Strong: return "Strong";
    case Tier::Eventual: return "Eventual";
    case Tier::Weak: return "Weak";
  }
  return "?";
}

int exit_code(Tier tier) {
  switch (tier) {
    case Tier::Strong: return 0;
    case Tier::Eventual: return 3;
    case Tier::Weak: return 4;
  }
  return 1;
}

Universe::Universe(const syntax::Program& program, const ReactorTable* library) : library_(library) {
  for (const auto& r : program.reactors()) program_[r->name] = r.get();
}

Resolved Universe::resolve(std::string_view name) const {
  if (auto it = program_.find(name); it != program_.end()) return {Resolved::Named, it->second, nullptr};
  if (library_ != nullptr) {
    if (const ReactorValue* v = library_->find(name)) {
      switch (v->kind()) {
        case ReactorValue::Kind::Named: return {Resolved::Named, &v->as_named(), nullptr};
        case ReactorValue::Kind::Primitive: return {Resolved::Primitive, nullptr, &v->as_primitive()};
        case ReactorValue::Kind::Io: return {Resolved::Io, nullptr, nullptr};
        case ReactorValue::Kind::Capture: return {Resolved::Other, nullptr, nullptr};
      }
    }
  }
  return {};
}

namespace {

using Scope = std::set<std::string, std::less<>>;

struct Facts {
  std::set<std::string> named_refs;
  std::set<std::string> slow_primitives;
  std::vector<SourceSpan> self_application;
  bool trampolines = false;
  bool conditionals = false;
  bool dynamic = false;
  std::size_t rhos = 0;
};

class Scanner {
 public:
  Scanner(const Universe& u, Facts& f) : u_(u), f_(f) {}

  void expr(const syntax::Expr& e, const Scope& scope) {
    if (const auto* v = e.as<syntax::VarRef>()) {
      if (!scope.count(v->name)) note(v->name);
    } else if (const auto* d = e.as<syntax::Deploy>()) {
      const auto* op = d->op->as<syntax::VarRef>();
      if (op != nullptr && !d->operands.empty()) {
        const auto* first = d->operands.front()->as<syntax::VarRef>();
        if (first != nullptr && first->name == op->name) f_.self_application.push_back(e.span);
      }
      if (op != nullptr && !scope.count(op->name)) {
        note(op->name);
      } else {
        f_.dynamic = true;
        expr(*d->op, scope);
      }
      for (const auto& a : d->operands) expr(*a, scope);
    } else if (const auto* i = e.as<syntax::If>()) {
      f_.conditionals = true;
      expr(*i->cond, scope);
      expr(*i->consequent, scope);
      expr(*i->alternate, scope);
    } else if (const auto* r = e.as<syntax::Rho>()) {
      ++f_.rhos;
      Scope inner = scope;
      inner.insert(r->params.begin(), r->params.end());
      body(r->body, inner);
    }
  }

  void body(const syntax::Body& b, Scope scope) {
    for (const auto& d : b.defs) {
      expr(*d.expr, scope);
      scope.insert(d.targets.begin(), d.targets.end());
    }
    for (const auto& s : b.sinks) expr(*s, scope);
    for (const auto& s : b.updates) expr(*s, scope);
  }

  void reactor(const syntax::ReactorDef& def) {
    Scope scope(def.params.begin(), def.params.end());
    if (!def.trampolines.empty()) f_.trampolines = true;
    for (const auto& t : def.trampolines) expr(*t.init, scope);
    for (const auto& t : def.trampolines) scope.insert(t.name);
    body(def.body, scope);
  }

 private:
  void note(const std::string& name) {
    Resolved r = u_.resolve(name);
    if (r.kind == Resolved::Named) f_.named_refs.insert(name);
    if (r.kind == Resolved::Primitive && !r.primitive->constant_time) f_.slow_primitives.insert(name);
  }

  const Universe& u_;
  Facts& f_;
};

/// Per-reactor facts for the program reactors and every library reactor
/// they reach; "" holds the global definitions.
std::map<std::string, Facts> scan(const syntax::Program& program, const Universe& u) {
  std::map<std::string, Facts> out;
  Facts& globals = out[""];
  Scope scope;
  Scanner g(u, globals);
  for (const auto& d : program.definitions) {
    if (const auto* def = std::get_if<syntax::SignalDef>(&d)) {
      g.expr(*def->expr, scope);
      scope.insert(def->targets.begin(), def->targets.end());
    }
  }
  std::vector<std::string> work;
  for (const auto& r : program.reactors()) work.push_back(r->name);
  for (const auto& n : globals.named_refs) work.push_back(n);
  while (!work.empty()) {
    std::string name = work.back();
    work.pop_back();
    if (out.count(name)) continue;
    Resolved r = u.resolve(name);
    if (r.kind != Resolved::Named) continue;
    Facts& f = out[name];
    Scanner(u, f).reactor(*r.def);
    for (const auto& n : f.named_refs) work.push_back(n);
  }
  return out;
}

std::vector<std::vector<std::string>> cycles_of(const std::map<std::string, Facts>& facts, std::size_t limit) {
  std::vector<std::string> names;
  for (const auto& [n, f] : facts) {
    if (!n.empty()) names.push_back(n);
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index[names[i]] = i;
  std::vector<std::vector<std::size_t>> adj(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (const auto& r : facts.at(names[i]).named_refs) {
      if (auto it = index.find(r); it != index.end()) adj[i].push_back(it->second);
    }
  }

  // Each elementary cycle is reported once, from its smallest node.
  std::vector<std::vector<std::string>> out;
  std::vector<std::size_t> path;
  std::vector<bool> on_path(names.size(), false);
  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t start, std::size_t v) {
    for (std::size_t w : adj[v]) {
      if (out.size() >= limit) return;
      if (w == start) {
        std::vector<std::string> cycle;
        for (std::size_t p : path) cycle.push_back(names[p]);
        out.push_back(std::move(cycle));
      } else if (w > start && !on_path[w]) {
        on_path[w] = true;
        path.push_back(w);
        dfs(start, w);
        path.pop_back();
        on_path[w] = false;
      }
    }
  };
  for (std::size_t s = 0; s < names.size() && out.size() < limit; ++s) {
    path = {s};
    on_path[s] = true;
    dfs(s, s);
    on_path[s] = false;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::string>> detect_recursion(const syntax::Program& program, const ReactorTable* library,
                                                       std::size_t limit) {
  Universe u(program, library);
  return cycles_of(scan(program, u), limit);
}

std::vector<SourceSpan> detect_self_application(const syntax::Program& program) {
  Universe u(program, nullptr);
  Facts f;
  Scanner s(u, f);
  Scope scope;
  for (const auto& d : program.definitions) {
    if (const auto* r = std::get_if<syntax::ReactorDefPtr>(&d)) {
      s.reactor(**r);
    } else {
      const auto& def = std::get<syntax::SignalDef>(d);
      s.expr(*def.expr, scope);
      scope.insert(def.targets.begin(), def.targets.end());
    }
  }
  return f.self_application;
}

Classification classify(const syntax::Program& program, const ReactorTable* library) {
  Universe u(program, library);
  auto facts = scan(program, u);

  Classification c;
  FeatureReport& fr = c.features;
  std::set<std::string> slow;
  for (const auto& [name, f] : facts) {
    if (!name.empty()) fr.reactors.push_back(name);
    fr.uses_trampolines |= f.trampolines;
    fr.uses_conditionals |= f.conditionals;
    fr.uses_dynamic_operators |= f.dynamic;
    fr.rho_count += f.rhos;
    fr.self_application_sites.insert(fr.self_application_sites.end(), f.self_application.begin(),
                                     f.self_application.end());
    slow.insert(f.slow_primitives.begin(), f.slow_primitives.end());
  }
  fr.non_constant_time_primitives.assign(slow.begin(), slow.end());
  fr.recursion_cycles = cycles_of(facts, 10000);

  for (const auto& cycle : fr.recursion_cycles) {
    c.justification.push_back("recursive reactors: " + join(cycle, " -> ") + " -> " + cycle.front());
  }
  for (const auto& span : fr.self_application_sites) {
    c.justification.push_back("self-application (x x) at " + span.to_string() +
                              " (static approximation: a fixpoint combinator may be present)");
  }
  for (const auto& p : fr.non_constant_time_primitives) {
    c.justification.push_back("primitive '" + p + "' does not update its sink in constant time");
  }
  if (!fr.recursion_cycles.empty() || !fr.self_application_sites.empty()) {
    c.tier = Tier::Weak;
    c.justification.insert(c.justification.begin(), "a turn may not terminate");
  } else if (!fr.non_constant_time_primitives.empty()) {
    c.tier = Tier::Eventual;
    c.justification.insert(c.justification.begin(), "every turn terminates, with no constant bound on its work");
  } else {
    c.tier = Tier::Strong;
    c.justification.push_back("no recursion, no self-application, every referenced primitive is constant-time");
  }
  return c;
}

Json Classification::to_json() const {
  Json j;
  j["tier"] = std::string(to_string(tier));
  j["justification"] = justification;
  Json f;
  f["uses_trampolines"] = features.uses_trampolines;
  f["uses_conditionals"] = features.uses_conditionals;
  f["uses_dynamic_operators"] = features.uses_dynamic_operators;
  f["recursion_cycles"] = features.recursion_cycles;
  f["rho_count"] = features.rho_count;
  Json sites = Json::array();
  for (const auto& s : features.self_application_sites) sites.push_back(s.to_string());
  f["self_application_sites"] = sites;
  f["non_constant_time_primitives"] = features.non_constant_time_primitives;
  f["reactors"] = features.reactors;
  j["features"] = f;
  return j;
}

std::string Classification::to_text() const {
  auto yes = [](bool b) { return b ? "yes" : "no"; };
  std::string out = "tier: " + std::string(to_string(tier)) + "\n";
  for (const auto& line : justification) out += "  - " + line + "\n";
  out += "features:\n";
  out += std::string("  trampolines: ") + yes(features.uses_trampolines) + "\n";
  out += std::string("  conditionals: ") + yes(features.uses_conditionals) + "\n";
  out += std::string("  dynamic operators: ") + yes(features.uses_dynamic_operators) + "\n";
  out += "  rho expressions: " + std::to_string(features.rho_count) + "\n";
  out += "  recursion cycles:";
  if (features.recursion_cycles.empty()) out += " none";
  for (const auto& c : features.recursion_cycles) out += " [" + join(c, " ") + "]";
  out += "\n  self-application sites: " + std::to_string(features.self_application_sites.size()) + "\n";
  out += "  non-constant-time primitives: " +
         (features.non_constant_time_primitives.empty() ? std::string("none")
                                                        : join(features.non_constant_time_primitives, " ")) +
         "\n";
  return out;
}

}  // namespace haai::analysis
