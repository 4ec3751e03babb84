#include <doctest.h>

#include <limits>
#include <random>
#include <set>

#include "support.hpp"

using namespace haai;
using haai::test::Harness;

namespace {

Value apply(const std::string& name, std::vector<Value> args) {
  for (const auto& p : stdlib::primitives()) {
    if (p->name == name) return p->apply(args);
  }
  throw std::runtime_error("no primitive " + name);
}

ErrorCode apply_error(const std::string& name, std::vector<Value> args) {
  try {
    apply(name, std::move(args));
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::UnboundIdentifier;
}

std::vector<Value> sample_values(std::mt19937& rng) {
  std::vector<Value> out = {Value(0), Value(7), Value(-3), Value(2.5), Value(true), Value("ab"),
                            Value::pair(1, 2), Value::vector({1, 2, 3})};
  out.push_back(Value(static_cast<std::int64_t>(rng() % 1000)));
  return out;
}

}  // namespace

TEST_CASE("the registry covers the required primitives") {
  std::set<std::string> names;
  for (const auto& p : stdlib::primitives()) names.insert(p->name);
  for (const char* n : {"+", "-", "*", "/", "<", "<=", ">", ">=", "=", "even?", "odd?", "negative?", "positive?",
                        "zero?", "number?", "boolean?", "string?", "pair?", "not", "cons", "car", "cdr", "vector-ref",
                        "vector-length", "make-vector", "string-length", "string-append", "substring", "smallest",
                        "largest"}) {
    CHECK_MESSAGE(names.count(n) == 1, n);
  }
}

TEST_CASE("registry audit: constant time, one sink, no mutators or IO") {
  const std::set<std::string> forbidden = {"vector-set!", "set-car!", "set-cdr!", "display", "read", "eval",
                                           "call/cc", "call-with-current-continuation", "string-set!"};
  for (const auto& p : stdlib::primitives()) {
    CAPTURE(p->name);
    CHECK(p->constant_time);
    CHECK(p->sink_count == 1);
    CHECK(forbidden.count(p->name) == 0);
    CHECK(p->name.find('!') == std::string::npos);
  }
  for (const auto& io : stdlib::io_reactors()) {
    for (const auto& p : stdlib::primitives()) CHECK(p->name != io->name);
  }
}

TEST_CASE("referential transparency: applying twice gives equal results") {
  std::mt19937 rng(7);
  for (int round = 0; round < 20; ++round) {
    auto values = sample_values(rng);
    for (const auto& p : stdlib::primitives()) {
      std::size_t n = p->arity;
      std::vector<Value> args;
      for (std::size_t i = 0; i < n; ++i) args.push_back(values[rng() % values.size()]);
      std::optional<Value> first, second;
      std::optional<ErrorCode> e1, e2;
      try { first = p->apply(args); } catch (const Error& e) { e1 = e.code(); }
      try { second = p->apply(args); } catch (const Error& e) { e2 = e.code(); }
      CAPTURE(p->name);
      CHECK(e1 == e2);
      CHECK(first.has_value() == second.has_value());
      if (first && second) CHECK(*first == *second);
    }
  }
}

TEST_CASE("primitive examples and edge cases") {
  CHECK(apply("+", {2, 3}) == Value(5));
  CHECK(apply("+", {1, 2, 3, 4}) == Value(10));
  CHECK(apply("-", {10, 1, 2}) == Value(7));
  CHECK(apply("/", {6, 3}) == Value(2));
  CHECK(apply("/", {7, 2}) == Value(3.5));
  CHECK(apply("even?", {6}) == Value(true));
  CHECK(apply("smallest", {3, 5}) == Value(3));
  CHECK(apply("largest", {3, 5}) == Value(5));
  CHECK(apply("smallest", {2.5, 2}) == Value(2));
  CHECK(apply("=", {2, 2.0}) == Value(true));
  CHECK(apply("=", {"a", "a"}) == Value(true));
  CHECK(apply("<", {1, 1.5}) == Value(true));
  CHECK(apply("car", {Value::pair(1, 2)}) == Value(1));
  CHECK(apply("cdr", {Value::pair(1, 2)}) == Value(2));
  CHECK(apply("vector-ref", {Value::vector({4, 5}), 1}) == Value(5));
  CHECK(apply("make-vector", {2, 0}) == Value::vector({0, 0}));
  CHECK(apply("string-append", {"ab", "c", "d"}) == Value("abcd"));
  CHECK(apply("substring", {"hello", 1, 3}) == Value("el"));
  CHECK(apply("modulo", {-7, 3}) == Value(2));
  CHECK(apply("remainder", {-7, 3}) == Value(-1));
  CHECK(apply("not", {0}) == Value(false));

  CHECK(apply_error("/", {1, 0}) == ErrorCode::PrimitiveError);
  CHECK(apply_error("+", {1, "a"}) == ErrorCode::PrimitiveError);
  CHECK(apply_error("+", {std::numeric_limits<std::int64_t>::max(), 1}) == ErrorCode::PrimitiveError);
  CHECK(apply_error("even?", {2.5}) == ErrorCode::PrimitiveError);
  CHECK(apply_error("car", {1}) == ErrorCode::PrimitiveError);
  CHECK(apply_error("vector-ref", {Value::vector({1}), 1}) == ErrorCode::PrimitiveError);
  CHECK(apply_error("make-vector", {static_cast<std::int64_t>(stdlib::kMaxSize + 1), 0}) == ErrorCode::PrimitiveError);
  CHECK(apply_error("substring", {"abc", 2, 1}) == ErrorCode::PrimitiveError);
  CHECK(apply_error("quotient", {1, 0}) == ErrorCode::PrimitiveError);
}

TEST_CASE("prelude reactors") {
  Harness h("(def k (manual-in \"k\")) (def c (to-celsius k)) (def f (to-fahrenheit k))");
  h.inject({{"k", Value(300)}});
  CHECK(h.value("c")->as_double() == 300.0 - 273.15);
  CHECK(display(*h.value("c")) == "26.85");
  // (300 - 273.15) * 9 / 5 + 32, in the same operation order.
  CHECK(h.value("f")->as_double() == (300.0 - 273.15) * 9.0 / 5.0 + 32.0);
  CHECK(display(*h.value("f")) == "80.33");
}

TEST_CASE("load_source rejects signal definitions") {
  ReactorTable table;
  CHECK_THROWS_AS(stdlib::load_source(table, "(def x 1)", "bad.haai"), Error);
  CHECK(stdlib::load_source(table, "(defr (id x) x)", "ok.haai") == 1);
  CHECK(stdlib::load_examples(table) == 1);
  CHECK(table.find("fix") != nullptr);
}

TEST_CASE("property: prelude pre matches a native delayed accumulator on 1000 random inputs") {
  Harness h("(def s (manual-in \"s\")) (def p (pre s 0))");
  std::mt19937 rng(2024);
  std::int64_t acc = 0;
  for (int i = 0; i < 1000; ++i) {
    std::int64_t v = static_cast<std::int64_t>(rng() % 20001) - 10000;
    h.inject({{"s", Value(v)}});
    CHECK(h.value("p")->as_integer() == acc);
    acc = v;
  }
}
