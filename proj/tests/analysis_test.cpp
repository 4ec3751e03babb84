#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "dot.hpp"
#include "haai/analysis/analysis.hpp"
#include "haai/stdlib/stdlib.hpp"

using namespace haai;
using namespace haai::analysis;
using haai::test::DotGraph;

namespace {

ReactorTable library(bool examples = false) {
  ReactorTable t;
  stdlib::install(t);
  if (examples) stdlib::load_examples(t);
  return t;
}

std::string fixture(const std::string& rel) {
  std::ifstream in(std::string(HAAI_FIXTURES) + "/" + rel);
  REQUIRE(in.good());
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Tier tier_of(const std::string& text, const ReactorTable& lib) {
  return classify(syntax::parse_program(text), &lib).tier;
}

int weakness(Tier t) { return static_cast<int>(t); }

}  // namespace

TEST_CASE("fixture families classify per the feature table") {
  auto lib = library();
  CHECK(tier_of(fixture("classify/first-order.haai"), lib) == Tier::Strong);
  CHECK(tier_of(fixture("classify/stateful.haai"), lib) == Tier::Strong);
  CHECK(tier_of(fixture("classify/higher-order.haai"), lib) == Tier::Strong);
  CHECK(tier_of(fixture("classify/recursive.haai"), lib) == Tier::Weak);
  CHECK(tier_of(fixture("classify/fix.haai"), lib) == Tier::Weak);
  CHECK(tier_of(fixture("classify/rho.haai"), lib) == Tier::Strong);
  CHECK(tier_of(fixture("classify/mutual.haai"), lib) == Tier::Weak);
}

TEST_CASE("feature report contents") {
  auto lib = library();
  auto c = classify(syntax::parse_program(fixture("classify/higher-order.haai")), &lib);
  CHECK(c.features.uses_conditionals);
  CHECK(c.features.uses_dynamic_operators);
  CHECK_FALSE(c.features.uses_trampolines);
  CHECK(c.features.recursion_cycles.empty());

  auto s = classify(syntax::parse_program(fixture("classify/stateful.haai")), &lib);
  CHECK(s.features.uses_trampolines);
  CHECK_FALSE(s.features.uses_conditionals);

  auto r = classify(syntax::parse_program(fixture("classify/rho.haai")), &lib);
  CHECK(r.features.rho_count == 1);
  CHECK(r.features.self_application_sites.empty());

  auto j = classify(syntax::parse_program(fixture("classify/recursive.haai")), &lib).to_json();
  CHECK(j["tier"] == "Weak");
  CHECK(j["features"]["recursion_cycles"] == Json::parse(R"([["collatz-length"]])"));
  CHECK(j.dump().find("justification") != std::string::npos);
}

TEST_CASE("library reactors count when the program reaches them") {
  auto lib = library(true);
  // collatz-length lives in the prelude; using it makes the program weak.
  CHECK(tier_of("(def n (manual-in \"n\")) (def c (collatz-length n 0))", lib) == Tier::Weak);
  CHECK(tier_of("(def n (manual-in \"n\")) (def c (collatz-step n))", lib) == Tier::Strong);
  CHECK(tier_of("(def f (fix car))", lib) == Tier::Weak);
  // Unreferenced library reactors do not.
  CHECK(tier_of("(def x 1)", lib) == Tier::Strong);
}

TEST_CASE("a non-constant-time primitive makes the program eventual") {
  auto lib = library();
  auto sort = std::make_shared<PrimitiveSpec>();
  sort->name = "sort";
  sort->constant_time = false;
  lib.define("sort", ReactorValue::primitive(sort));
  auto c = classify(syntax::parse_program("(def v (manual-in \"v\")) (def w (sort v))"), &lib);
  CHECK(c.tier == Tier::Eventual);
  CHECK(c.features.non_constant_time_primitives == std::vector<std::string>{"sort"});
  // Weak still wins.
  CHECK(tier_of("(defr (f x) (f (sort x)))", lib) == Tier::Weak);
  CHECK(exit_code(Tier::Strong) == 0);
  CHECK(exit_code(Tier::Eventual) == 3);
  CHECK(exit_code(Tier::Weak) == 4);
}

TEST_CASE("recursion detection examples") {
  auto lib = library();
  CHECK(detect_recursion(syntax::parse_program(fixture("listings/listing08.haai")), &lib) ==
        std::vector<std::vector<std::string>>{{"collatz-length"}});
  CHECK(detect_recursion(syntax::parse_program(fixture("listings/listing02.haai")), &lib).empty());
  CHECK(detect_recursion(syntax::parse_program("(defr (A x) (B x)) (defr (B x) (A x))")) ==
        std::vector<std::vector<std::string>>{{"A", "B"}});
  // A parameter shadows a reactor of the same name.
  CHECK(detect_recursion(syntax::parse_program("(defr (f f) (f 1))")).empty());
}

TEST_CASE("self-application sites") {
  CHECK(detect_self_application(syntax::parse_program(fixture("listings/listing10.haai"))).size() == 2);
  CHECK(detect_self_application(syntax::parse_program(fixture("listings/listing09.haai"))).empty());
  auto sites = detect_self_application(syntax::parse_program("(def g (manual-in \"g\"))\n(def h (g g))"));
  REQUIRE(sites.size() == 1);
  CHECK(sites[0].line == 2);
}

// Random reactor reference graphs, checked against brute force.
namespace {

struct RandomProgram {
  std::size_t n;
  std::vector<std::set<std::size_t>> edges;
  std::string text;
};

RandomProgram random_program(std::mt19937& rng, std::size_t n) {
  RandomProgram p{n, std::vector<std::set<std::size_t>>(n), ""};
  for (std::size_t i = 0; i < n; ++i) {
    std::string body = "x";
    std::size_t refs = rng() % 3;
    for (std::size_t k = 0; k < refs; ++k) {
      std::size_t j = rng() % n;
      p.edges[i].insert(j);
      std::string call = "(r" + std::to_string(j) + " x)";
      switch (rng() % 3) {
        case 0: body = "(+ " + body + " " + call + ")"; break;
        case 1: body = "(if (zero? x) " + body + " " + call + ")"; break;
        default: body = "((rho (y) (* y " + call + ")) " + body + ")"; break;
      }
    }
    p.text += "(defr (r" + std::to_string(i) + " x) " + body + ")\n";
  }
  return p;
}

std::set<std::vector<std::string>> brute_force_cycles(const RandomProgram& p) {
  std::set<std::vector<std::string>> out;
  // Every subset, every ordering starting at its smallest member.
  for (std::uint32_t mask = 1; mask < (1u << p.n); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < p.n; ++i) {
      if (mask & (1u << i)) members.push_back(i);
    }
    do {
      bool ok = true;
      for (std::size_t k = 0; k < members.size() && ok; ++k) {
        ok = p.edges[members[k]].count(members[(k + 1) % members.size()]) > 0;
      }
      if (ok) {
        std::vector<std::string> names;
        for (auto m : members) names.push_back("r" + std::to_string(m));
        out.insert(names);
      }
    } while (std::next_permutation(members.begin() + 1, members.end()));
  }
  return out;
}

}  // namespace

TEST_CASE("property: reported cycles equal brute-force enumeration") {
  std::mt19937 rng(11);
  for (int round = 0; round < 300; ++round) {
    auto p = random_program(rng, 1 + rng() % 6);
    auto cycles = detect_recursion(syntax::parse_program(p.text));
    std::set<std::vector<std::string>> got(cycles.begin(), cycles.end());
    CHECK(got.size() == cycles.size());
    CHECK(got == brute_force_cycles(p));
  }
}

TEST_CASE("property: every self-reaching reactor lies on a reported cycle (up to 10 reactors)") {
  std::mt19937 rng(12);
  for (int round = 0; round < 200; ++round) {
    auto p = random_program(rng, 1 + rng() % 10);
    // Transitive closure.
    std::vector<std::vector<bool>> reach(p.n, std::vector<bool>(p.n, false));
    for (std::size_t i = 0; i < p.n; ++i) {
      for (auto j : p.edges[i]) reach[i][j] = true;
    }
    for (std::size_t k = 0; k < p.n; ++k) {
      for (std::size_t i = 0; i < p.n; ++i) {
        for (std::size_t j = 0; j < p.n; ++j) reach[i][j] = reach[i][j] || (reach[i][k] && reach[k][j]);
      }
    }
    std::set<std::string> on_cycle;
    for (const auto& c : detect_recursion(syntax::parse_program(p.text))) on_cycle.insert(c.begin(), c.end());
    for (std::size_t i = 0; i < p.n; ++i) CHECK(on_cycle.count("r" + std::to_string(i)) == (reach[i][i] ? 1u : 0u));
  }
}

TEST_CASE("property: adding a definition never strengthens the tier") {
  auto lib = library(true);
  std::vector<std::string> pool = {
      "(defr (a x) (+ x 1))",
      "(defr (b x | (s x)) (out (+ x s) | x))",
      "(defr (c x) (if (even? x) (a x) 0))",
      "(defr (d x) (d x))",
      "(defr (e x) ((rho (y) (+ y x)) x))",
      "(defr (g f) (f f))",
      "(def p (manual-in \"p\"))",
      "(def q (collatz-length 6 0))",
      "(def w (pre 1 0))",
      "(defr (h x) (e (c x)))",
  };
  std::mt19937 rng(5);
  for (int round = 0; round < 300; ++round) {
    std::string text;
    Tier prev = Tier::Strong;
    for (int k = 0; k < 6; ++k) {
      text += pool[rng() % pool.size()] + "\n";
      Tier now;
      try {
        now = tier_of(text, lib);
      } catch (const Error&) {
        break;  // duplicate reactor names
      }
      CHECK(weakness(now) >= weakness(prev));
      prev = now;
    }
  }
}

TEST_CASE("graph of to-celsius") {
  auto lib = library();
  auto g = DotGraph::parse(export_graph({}, "to-celsius", &lib));
  auto sources = g.in_cluster("sources");
  REQUIRE(sources.size() == 1);
  CHECK(sources[0]->label == "k");
  CHECK(g.in_cluster("sinks").size() == 1);
  std::size_t boxes = 0, constants = 0;
  for (const auto& [id, n] : g.nodes) {
    if (n.shape == "box") {
      ++boxes;
      CHECK(n.label == "-");
    }
    if (n.label == "273.15") ++constants;
  }
  CHECK(boxes == 1);
  CHECK(constants == 1);
}

TEST_CASE("graph of min-max has two trampolines with init and update edges") {
  auto lib = library();
  auto g = DotGraph::parse(export_graph({}, "min-max", &lib));
  auto tramps = g.in_cluster("trampolines");
  REQUIRE(tramps.size() == 2);
  for (const auto* t : tramps) {
    std::size_t solid = 0, dashed = 0;
    for (const auto& e : g.edges) {
      if (e.to != t->id) continue;
      (e.dashed() ? dashed : solid)++;
    }
    CHECK(solid == 1);
    CHECK(dashed == 1);
  }
  CHECK(g.acyclic_without_dashed());
  // With the dashed edges the graph does have cycles.
  DotGraph all = g;
  for (auto& e : all.edges) e.attrs.clear();
  CHECK_FALSE(all.acyclic_without_dashed());
}

TEST_CASE("graph details for the other listings") {
  auto lib = library(true);
  CHECK(DotGraph::parse(export_graph({}, "sum-and-product", &lib)).in_cluster("sinks").size() == 2);
  auto cs = DotGraph::parse(export_graph({}, "collatz-step", &lib));
  CHECK(cs.count_clusters("then") == 1);
  CHECK(cs.count_clusters("else") == 1);
  auto mtl = DotGraph::parse(export_graph({}, "make-temp-locale", &lib));
  CHECK(mtl.count_clusters("rho") == 1);
  auto tl = DotGraph::parse(export_graph({}, "temp-locale", &lib));
  bool apply = false;
  for (const auto& [id, n] : tl.nodes) apply = apply || (n.shape == "box" && n.label == "apply");
  CHECK(apply);
  // Program definitions shadow the library.
  auto prog = syntax::parse_program("(defr (to-celsius k) (def x (* k 2)) (+ x 1))");
  CHECK(DotGraph::parse(export_graph(prog, "to-celsius", &lib)).in_cluster("sinks").front()->label == "sink");
  try {
    export_graph({}, "nope", &lib);
    FAIL("expected UnknownReactor");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownReactor);
  }
  CHECK_THROWS_AS(export_graph({}, "+", &lib), Error);
}

TEST_CASE("property: dashed edges break every cycle of every exported graph") {
  auto lib = library(true);
  for (const auto& name : lib.names()) {
    const ReactorValue* v = lib.find(name);
    if (v->kind() != ReactorValue::Kind::Named) continue;
    CAPTURE(name);
    CHECK(DotGraph::parse(export_graph({}, name, &lib)).acyclic_without_dashed());
  }
  std::mt19937 rng(3);
  for (int round = 0; round < 200; ++round) {
    // Stateful reactors with random update wiring.
    std::size_t t = 1 + rng() % 3;
    std::string header = "(defr (r s", updates;
    header += " |";
    for (std::size_t i = 0; i < t; ++i) header += " (t" + std::to_string(i) + " s)";
    header += ")";
    std::string defs, prev = "s";
    for (std::size_t i = 0; i < t; ++i) {
      std::string other = "t" + std::to_string(rng() % t);
      defs += " (def d" + std::to_string(i) + " (+ " + prev + " " + other + "))";
      prev = "d" + std::to_string(i);
    }
    for (std::size_t i = 0; i < t; ++i) updates += " d" + std::to_string(rng() % t);
    std::string text = header + defs + " (out " + prev + " |" + updates + "))";
    CAPTURE(text);
    auto g = DotGraph::parse(export_graph(syntax::parse_program(text), "r"));
    CHECK(g.in_cluster("trampolines").size() == t);
    CHECK(g.acyclic_without_dashed());
  }
}
