#include <cmath>
#include <limits>

#include "haai/stdlib/stdlib.hpp"

namespace haai::stdlib {
namespace {

using Args = std::span<const Value>;

[[noreturn]] void fail(const std::string& prim, const std::string& message) {
  throw Error(ErrorCode::PrimitiveError, prim + ": " + message);
}

const Value& number(const std::string& prim, const Value& v) {
  if (!v.is_number()) fail(prim, "expected a number, got " + std::string(type_name(v)) + " " + display(v));
  return v;
}

std::int64_t integer(const std::string& prim, const Value& v) {
  if (!v.is_integer()) fail(prim, "expected an exact integer, got " + display(v));
  return v.as_integer();
}

Value add(const Value& a, const Value& b) {
  if (a.is_integer() && b.is_integer()) {
    std::int64_t r;
    if (__builtin_add_overflow(a.as_integer(), b.as_integer(), &r)) fail("+", "integer overflow");
    return r;
  }
  return a.as_double() + b.as_double();
}

Value sub(const Value& a, const Value& b) {
  if (a.is_integer() && b.is_integer()) {
    std::int64_t r;
    if (__builtin_sub_overflow(a.as_integer(), b.as_integer(), &r)) fail("-", "integer overflow");
    return r;
  }
  return a.as_double() - b.as_double();
}

Value mul(const Value& a, const Value& b) {
  if (a.is_integer() && b.is_integer()) {
    std::int64_t r;
    if (__builtin_mul_overflow(a.as_integer(), b.as_integer(), &r)) fail("*", "integer overflow");
    return r;
  }
  return a.as_double() * b.as_double();
}

// Exact when both are integers and the division is exact.
Value div(const Value& a, const Value& b) {
  if (b.as_double() == 0.0) fail("/", "division by zero");
  if (a.is_integer() && b.is_integer()) {
    std::int64_t x = a.as_integer(), y = b.as_integer();
    if (!(x == std::numeric_limits<std::int64_t>::min() && y == -1) && x % y == 0) return x / y;
  }
  return a.as_double() / b.as_double();
}

template <class Op>
std::function<Value(Args)> fold(std::string name, Op op) {
  return [name, op](Args args) {
    Value acc = number(name, args[0]);
    for (std::size_t i = 1; i < args.size(); ++i) acc = op(acc, number(name, args[i]));
    return acc;
  };
}

template <class Cmp>
std::function<Value(Args)> compare(std::string name, Cmp cmp) {
  return [name, cmp](Args args) {
    const Value& a = number(name, args[0]);
    const Value& b = number(name, args[1]);
    if (a.is_integer() && b.is_integer()) return Value(cmp(a.as_integer(), b.as_integer()));
    return Value(cmp(a.as_double(), b.as_double()));
  };
}

bool numeric_less(const Value& a, const Value& b) {
  if (a.is_integer() && b.is_integer()) return a.as_integer() < b.as_integer();
  return a.as_double() < b.as_double();
}

std::shared_ptr<const PrimitiveSpec> spec(std::string name, std::size_t arity, bool variadic,
                                          std::function<Value(Args)> apply) {
  auto p = std::make_shared<PrimitiveSpec>();
  p->name = std::move(name);
  p->arity = arity;
  p->variadic = variadic;
  p->apply = std::move(apply);
  return p;
}

std::vector<std::shared_ptr<const PrimitiveSpec>> build() {
  std::vector<std::shared_ptr<const PrimitiveSpec>> out;
  auto add_spec = [&](std::string name, std::size_t arity, bool variadic, std::function<Value(Args)> f) {
    out.push_back(spec(std::move(name), arity, variadic, std::move(f)));
  };

  add_spec("+", 2, true, fold("+", add));
  add_spec("-", 2, true, fold("-", sub));
  add_spec("*", 2, true, fold("*", mul));
  add_spec("/", 2, true, fold("/", div));

  add_spec("<", 2, false, compare("<", [](auto a, auto b) { return a < b; }));
  add_spec("<=", 2, false, compare("<=", [](auto a, auto b) { return a <= b; }));
  add_spec(">", 2, false, compare(">", [](auto a, auto b) { return a > b; }));
  add_spec(">=", 2, false, compare(">=", [](auto a, auto b) { return a >= b; }));
  add_spec("=", 2, false, [](Args a) {
    if (a[0].is_number() && a[1].is_number()) {
      if (a[0].is_integer() && a[1].is_integer()) return Value(a[0].as_integer() == a[1].as_integer());
      return Value(a[0].as_double() == a[1].as_double());
    }
    return Value(a[0] == a[1]);
  });

  add_spec("even?", 1, false, [](Args a) { return Value(integer("even?", a[0]) % 2 == 0); });
  add_spec("odd?", 1, false, [](Args a) { return Value(integer("odd?", a[0]) % 2 != 0); });
  add_spec("negative?", 1, false, [](Args a) { return Value(number("negative?", a[0]).as_double() < 0); });
  add_spec("positive?", 1, false, [](Args a) { return Value(number("positive?", a[0]).as_double() > 0); });
  add_spec("zero?", 1, false, [](Args a) { return Value(number("zero?", a[0]).as_double() == 0); });
  add_spec("number?", 1, false, [](Args a) { return Value(a[0].is_number()); });
  add_spec("boolean?", 1, false, [](Args a) { return Value(a[0].is_boolean()); });
  add_spec("string?", 1, false, [](Args a) { return Value(a[0].is_string()); });
  add_spec("pair?", 1, false, [](Args a) { return Value(a[0].is_pair()); });
  add_spec("vector?", 1, false, [](Args a) { return Value(a[0].is_vector()); });
  add_spec("not", 1, false, [](Args a) { return Value(!a[0].truthy()); });

  add_spec("cons", 2, false, [](Args a) { return Value::pair(a[0], a[1]); });
  add_spec("car", 1, false, [](Args a) {
    if (!a[0].is_pair()) fail("car", "expected a pair, got " + display(a[0]));
    return a[0].as_pair().car;
  });
  add_spec("cdr", 1, false, [](Args a) {
    if (!a[0].is_pair()) fail("cdr", "expected a pair, got " + display(a[0]));
    return a[0].as_pair().cdr;
  });

  add_spec("vector-ref", 2, false, [](Args a) {
    if (!a[0].is_vector()) fail("vector-ref", "expected a vector, got " + display(a[0]));
    std::int64_t i = integer("vector-ref", a[1]);
    const auto& v = a[0].as_vector();
    if (i < 0 || static_cast<std::size_t>(i) >= v.size()) fail("vector-ref", "index " + std::to_string(i) + " out of range");
    return v[static_cast<std::size_t>(i)];
  });
  add_spec("vector-length", 1, false, [](Args a) {
    if (!a[0].is_vector()) fail("vector-length", "expected a vector, got " + display(a[0]));
    return Value(static_cast<std::int64_t>(a[0].as_vector().size()));
  });
  add_spec("make-vector", 2, false, [](Args a) {
    std::int64_t n = integer("make-vector", a[0]);
    if (n < 0 || static_cast<std::size_t>(n) > kMaxSize) fail("make-vector", "size " + std::to_string(n) + " out of range");
    return Value::vector(VectorData(static_cast<std::size_t>(n), a[1]));
  });

  add_spec("string-length", 1, false, [](Args a) {
    if (!a[0].is_string()) fail("string-length", "expected a string, got " + display(a[0]));
    return Value(static_cast<std::int64_t>(a[0].as_string().size()));
  });
  add_spec("string-append", 2, true, [](Args a) {
    std::string out;
    for (const auto& v : a) {
      if (!v.is_string()) fail("string-append", "expected a string, got " + display(v));
      out += v.as_string();
      if (out.size() > kMaxSize) fail("string-append", "result longer than " + std::to_string(kMaxSize));
    }
    return Value(std::move(out));
  });
  add_spec("substring", 3, false, [](Args a) {
    if (!a[0].is_string()) fail("substring", "expected a string, got " + display(a[0]));
    const auto& s = a[0].as_string();
    std::int64_t from = integer("substring", a[1]), to = integer("substring", a[2]);
    if (from < 0 || to < from || static_cast<std::size_t>(to) > s.size()) fail("substring", "range out of bounds");
    return Value(s.substr(static_cast<std::size_t>(from), static_cast<std::size_t>(to - from)));
  });

  add_spec("smallest", 2, false, [](Args a) {
    return numeric_less(number("smallest", a[1]), number("smallest", a[0])) ? a[1] : a[0];
  });
  add_spec("largest", 2, false, [](Args a) {
    return numeric_less(number("largest", a[0]), number("largest", a[1])) ? a[1] : a[0];
  });

  auto int_div = [](std::string name, auto op) {
    return [name, op](Args a) {
      std::int64_t x = integer(name, a[0]), y = integer(name, a[1]);
      if (y == 0) fail(name, "division by zero");
      if (x == std::numeric_limits<std::int64_t>::min() && y == -1) fail(name, "integer overflow");
      return Value(op(x, y));
    };
  };
  add_spec("quotient", 2, false, int_div("quotient", [](std::int64_t x, std::int64_t y) { return x / y; }));
  add_spec("remainder", 2, false, int_div("remainder", [](std::int64_t x, std::int64_t y) { return x % y; }));
  add_spec("modulo", 2, false, int_div("modulo", [](std::int64_t x, std::int64_t y) {
             std::int64_t r = x % y;
             return (r != 0 && ((r < 0) != (y < 0))) ? r + y : r;
           }));
  add_spec("abs", 1, false, [](Args a) {
    const Value& v = number("abs", a[0]);
    if (v.is_integer()) {
      if (v.as_integer() == std::numeric_limits<std::int64_t>::min()) fail("abs", "integer overflow");
      return Value(v.as_integer() < 0 ? -v.as_integer() : v.as_integer());
    }
    return Value(std::fabs(v.as_double()));
  });
  return out;
}

std::shared_ptr<const IoReactorSpec> io(std::string name, IoDirection dir, std::size_t arity, std::size_t config) {
  auto p = std::make_shared<IoReactorSpec>();
  p->name = std::move(name);
  p->direction = dir;
  p->arity = arity;
  p->config_arity = config;
  return p;
}

}  // namespace

const std::vector<std::shared_ptr<const PrimitiveSpec>>& primitives() {
  static const auto specs = build();
  return specs;
}

const std::vector<std::shared_ptr<const IoReactorSpec>>& io_reactors() {
  static const std::vector<std::shared_ptr<const IoReactorSpec>> specs = {
      io("manual-in", IoDirection::Producer, 1, 1),  io("ws-in", IoDirection::Producer, 1, 1),
      io("timer", IoDirection::Producer, 1, 1),      io("stdin-lines", IoDirection::Producer, 0, 0),
      io("ws-out", IoDirection::Consumer, 2, 1),     io("stdout-out", IoDirection::Consumer, 1, 0),
  };
  return specs;
}

std::size_t register_primitives(ReactorTable& table) {
  for (const auto& p : primitives()) table.define(p->name, ReactorValue::primitive(p));
  return primitives().size();
}

std::size_t register_io_reactors(ReactorTable& table) {
  for (const auto& p : io_reactors()) table.define(p->name, ReactorValue::io(p));
  return io_reactors().size();
}

std::size_t load_source(ReactorTable& table, std::string_view text, std::string_view file) {
  auto program = syntax::parse_program(text, file);
  std::size_t n = 0;
  for (const auto& d : program.definitions) {
    if (const auto* r = std::get_if<syntax::ReactorDefPtr>(&d)) {
      table.define((*r)->name, ReactorValue::named(*r));
      ++n;
    } else {
      throw Error(ErrorCode::NotADefinition, "a reactor library may only contain defr forms",
                  std::get<syntax::SignalDef>(d).span);
    }
  }
  return n;
}

std::size_t load_prelude(ReactorTable& table) { return load_source(table, prelude_source(), "prelude.haai"); }
std::size_t load_examples(ReactorTable& table) { return load_source(table, examples_source(), "examples.haai"); }

void install(ReactorTable& table) {
  register_primitives(table);
  register_io_reactors(table);
  load_prelude(table);
}

}  // namespace haai::stdlib
