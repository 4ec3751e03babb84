#include <map>

#include "haai/analysis/analysis.hpp"
#include "universe.hpp"

namespace haai::analysis {
namespace {

constexpr int kRoot = 0, kSources = 1, kTrampolines = 2, kInternal = 3, kSinks = 4;

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string short_label(const syntax::Expr& e) {
  std::string s = syntax::print(e);
  if (s.size() > 28) s = s.substr(0, 25) + "...";
  return s;
}

class GraphBuilder {
 public:
  using Scope = std::map<std::string, std::size_t, std::less<>>;

  explicit GraphBuilder(const Universe& u) : u_(u) {
    clusters_.push_back({"root", "", -1, false, ""});
    clusters_.push_back({"sources", "sources", kRoot, false, "rank=source;"});
    clusters_.push_back({"trampolines", "trampolines", kRoot, false, ""});
    clusters_.push_back({"internal", "internal", kRoot, false, ""});
    clusters_.push_back({"sinks", "sinks", kRoot, false, "rank=sink;"});
  }

  void reactor(const syntax::ReactorDef& def) {
    Scope scope;
    for (const auto& p : def.params) scope[p] = node(p, "ellipse", kSources);
    Scope init_scope = scope;
    std::vector<std::size_t> tramps;
    for (const auto& t : def.trampolines) {
      std::size_t n = node(t.name, "ellipse", kTrampolines, "peripheries=2");
      tramps.push_back(n);
      edge(expr(*t.init, init_scope, kInternal).front(), n, "label=\"init\"");
    }
    for (std::size_t i = 0; i < def.trampolines.size(); ++i) scope[def.trampolines[i].name] = tramps[i];

    auto sinks = body(def.body, scope, kInternal);
    for (std::size_t i = 0; i < def.body.updates.size() && i < tramps.size(); ++i) {
      edge(expr(*def.body.updates[i], scope, kInternal).front(), tramps[i], "style=dashed, label=\"update\"");
    }

    std::vector<bool> claimed(nodes_.size(), false);
    for (std::size_t k = 0; k < sinks.size(); ++k) {
      std::string label = sinks.size() == 1 ? "sink" : "sink " + std::to_string(k);
      std::size_t n = sinks[k];
      if (nodes_[n].cluster == kInternal && !claimed[n]) {
        claimed[n] = true;
        nodes_[n].cluster = kSinks;
        if (!nodes_[n].named) nodes_[n].label = label;
      } else {
        edge(n, node(label, "ellipse", kSinks));
      }
    }
  }

  std::string dot(std::string_view title) const {
    std::string out = "digraph " + quote(title) + " {\n  newrank=true;\n  node [fontname=\"Helvetica\"];\n";
    write_cluster(out, kRoot, 1);
    for (const auto& e : edges_) {
      out += "  n" + std::to_string(e.from) + " -> n" + std::to_string(e.to);
      if (!e.attrs.empty()) out += " [" + e.attrs + "]";
      out += ";\n";
    }
    return out + "}\n";
  }

 private:
  struct Node {
    std::string label, shape, extra;
    int cluster = kRoot;
    bool named = false;
  };
  struct Cluster {
    std::string name, label;
    int parent = kRoot;
    bool grey = false;
    std::string extra;
  };
  struct Edge {
    std::size_t from, to;
    std::string attrs;
  };

  std::size_t node(std::string label, std::string shape, int cluster, std::string extra = "") {
    nodes_.push_back({std::move(label), std::move(shape), std::move(extra), cluster, false});
    return nodes_.size() - 1;
  }
  int cluster(std::string name, std::string label, int parent) {
    clusters_.push_back({std::move(name), std::move(label), parent, true, ""});
    return static_cast<int>(clusters_.size()) - 1;
  }
  void edge(std::size_t from, std::size_t to, std::string attrs = "") { edges_.push_back({from, to, std::move(attrs)}); }

  std::vector<std::size_t> body(const syntax::Body& b, Scope& scope, int cl) {
    for (const auto& d : b.defs) {
      std::size_t mark = nodes_.size();
      auto outs = expr(*d.expr, scope, cl, d.targets.size());
      for (std::size_t i = 0; i < d.targets.size() && i < outs.size(); ++i) {
        if (outs[i] >= mark && !nodes_[outs[i]].named) {
          nodes_[outs[i]].label = d.targets[i];
          nodes_[outs[i]].named = true;
        }
        scope[d.targets[i]] = outs[i];
      }
    }
    std::vector<std::size_t> sinks;
    for (const auto& s : b.sinks) sinks.push_back(expr(*s, scope, cl).front());
    return sinks;
  }

  std::vector<std::size_t> expr(const syntax::Expr& e, const Scope& scope, int cl, std::size_t expected = 1) {
    if (const auto* v = e.as<syntax::VarRef>()) {
      if (auto it = scope.find(v->name); it != scope.end()) return {it->second};
      if (u_.resolve(v->name).kind != Resolved::None) return {node(v->name, "ellipse", cl)};
      return {node(v->name, "ellipse", cl, "style=dotted")};
    }
    if (e.as<syntax::Literal>()) return {node(syntax::print(e), "ellipse", cl)};

    if (const auto* d = e.as<syntax::Deploy>()) {
      std::vector<std::size_t> ins;
      for (const auto& a : d->operands) ins.push_back(expr(*a, scope, cl).front());
      std::size_t box;
      std::size_t outs = expected;
      const auto* op = d->op->as<syntax::VarRef>();
      if (op != nullptr && !scope.count(op->name)) {
        box = node(op->name, "box", cl);
        Resolved r = u_.resolve(op->name);
        if (r.kind == Resolved::Named) outs = std::max<std::size_t>(1, r.def->body.sinks.size());
      } else {
        std::size_t opn = expr(*d->op, scope, cl).front();
        box = node("apply", "box", cl);
        edge(opn, box, "style=bold, label=\"operator\"");
      }
      for (std::size_t in : ins) edge(in, box);
      std::vector<std::size_t> result;
      for (std::size_t i = 0; i < outs; ++i) {
        std::string label = short_label(e);
        if (outs > 1) label += "#" + std::to_string(i);
        result.push_back(node(label, "ellipse", cl));
        edge(box, result.back());
      }
      return result;
    }

    if (const auto* i = e.as<syntax::If>()) {
      std::size_t cond = expr(*i->cond, scope, cl).front();
      std::size_t box = node("if", "box", cl);
      edge(cond, box, "label=\"cond\"");
      int then_cl = cluster("branch", "then", cl);
      edge(expr(*i->consequent, scope, then_cl).front(), box, "label=\"then\"");
      int else_cl = cluster("branch", "else", cl);
      edge(expr(*i->alternate, scope, else_cl).front(), box, "label=\"else\"");
      std::size_t out = node(short_label(e), "ellipse", cl);
      edge(box, out);
      return {out};
    }

    const auto& r = std::get<syntax::Rho>(e.node);
    int rho_cl = cluster("rho", "rho", cl);
    Scope inner = scope;
    for (const auto& p : r.params) inner[p] = node(p, "ellipse", rho_cl);
    auto sinks = body(r.body, inner, rho_cl);
    std::size_t value = node("rho", "ellipse", cl, "style=bold");
    for (std::size_t s : sinks) edge(s, value, "style=dotted");
    return {value};
  }

  void write_cluster(std::string& out, int id, int indent) const {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const Cluster& c = clusters_[static_cast<std::size_t>(id)];
    std::string inner = pad;
    if (id != kRoot) {
      out += pad + "subgraph cluster_" + c.name + "_" + std::to_string(id) + " {\n";
      inner += "  ";
      out += inner + "label=" + quote(c.label) + ";\n";
      if (c.grey) out += inner + "style=filled; fillcolor=lightgrey;\n";
      if (!c.extra.empty()) out += inner + c.extra + "\n";
    }
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      const Node& x = nodes_[n];
      if (x.cluster != id) continue;
      out += inner + "n" + std::to_string(n) + " [label=" + quote(x.label) + ", shape=" + x.shape;
      if (!x.extra.empty()) out += ", " + x.extra;
      out += "];\n";
    }
    for (std::size_t k = 1; k < clusters_.size(); ++k) {
      if (clusters_[k].parent == id) write_cluster(out, static_cast<int>(k), indent + (id == kRoot ? 0 : 1));
    }
    if (id != kRoot) out += pad + "}\n";
  }

  const Universe& u_;
  std::vector<Node> nodes_;
  std::vector<Cluster> clusters_;
  std::vector<Edge> edges_;
};

}  // namespace

std::string export_graph(const syntax::Program& program, std::string_view reactor, const ReactorTable* library) {
  Universe u(program, library);
  Resolved r = u.resolve(reactor);
  if (r.kind != Resolved::Named) {
    throw Error(ErrorCode::UnknownReactor, "no reactor definition named '" + std::string(reactor) + "'");
  }
  GraphBuilder g(u);
  g.reactor(*r.def);
  return g.dot(reactor);
}

}  // namespace haai::analysis
