#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "haai/syntax/ast.hpp"

namespace haai {

class Signal;
class Value;

/// Built-in reactor. `apply` must be a pure function of its arguments; the
/// registry never holds anything that performs IO.
struct PrimitiveSpec {
  std::string name;
  std::size_t arity = 1;
  bool variadic = false;  // when set, `arity` is the minimum operand count
  std::size_t sink_count = 1;
  bool constant_time = true;
  std::function<Value(std::span<const Value>)> apply;
};

enum class IoDirection { Producer, Consumer };

/// Data producing/consuming reactors. The engine only records a request when
/// one is deployed; the runtime attaches the matching adapter.
struct IoReactorSpec {
  std::string name;
  IoDirection direction = IoDirection::Producer;
  std::size_t arity = 1;
  /// Leading operands that configure the adapter; they must be constants.
  /// A consumer's remaining operand is the signal it consumes.
  std::size_t config_arity = 1;
};

struct Capture;

class ReactorValue {
 public:
  enum class Kind { Primitive, Named, Capture, Io };

  static ReactorValue primitive(std::shared_ptr<const PrimitiveSpec> spec);
  static ReactorValue named(syntax::ReactorDefPtr def);
  static ReactorValue capture(std::shared_ptr<const Capture> capture);
  static ReactorValue io(std::shared_ptr<const IoReactorSpec> spec);

  Kind kind() const;
  const void* identity() const;
  std::string name() const;
  std::size_t arity() const;
  bool variadic() const;
  std::size_t sink_count() const;

  const PrimitiveSpec& as_primitive() const { return *std::get<0>(impl_); }
  const syntax::ReactorDef& as_named() const { return *std::get<1>(impl_); }
  const Capture& as_capture() const { return *std::get<2>(impl_); }
  const IoReactorSpec& as_io() const { return *std::get<3>(impl_); }

  bool operator==(const ReactorValue& other) const { return identity() == other.identity(); }

 private:
  using Impl = std::variant<std::shared_ptr<const PrimitiveSpec>, syntax::ReactorDefPtr, std::shared_ptr<const Capture>,
                            std::shared_ptr<const IoReactorSpec>>;
  explicit ReactorValue(Impl impl) : impl_(std::move(impl)) {}
  Impl impl_;
};

using Binding = std::variant<Signal*, ReactorValue>;
using Bindings = std::map<std::string, Binding, std::less<>>;

/// Runtime representation of an evaluated `rho`: the anonymous reactor plus
/// the signals (and reactors) its free identifiers resolved to.
struct Capture {
  syntax::ExprPtr rho_expr;
  Bindings snapshot;
  std::uint64_t serial = 0;

  const syntax::Rho& rho() const { return std::get<syntax::Rho>(rho_expr->node); }
};

struct Pair;
using VectorData = std::vector<Value>;

/// Immutable runtime value. Structural equality for data, identity for
/// reactors.
class Value {
 public:
  using Storage = std::variant<std::int64_t, double, bool, std::string, std::shared_ptr<const Pair>,
                               std::shared_ptr<const VectorData>, ReactorValue>;

  Value() : storage_(std::int64_t{0}) {}
  Value(std::int64_t v) : storage_(v) {}
  Value(int v) : storage_(std::int64_t{v}) {}
  Value(double v) : storage_(v) {}
  Value(bool v) : storage_(v) {}
  Value(std::string v) : storage_(std::move(v)) {}
  Value(const char* v) : storage_(std::string(v)) {}
  Value(ReactorValue v) : storage_(std::move(v)) {}

  static Value pair(Value car, Value cdr);
  static Value vector(VectorData items);
  static Value from_literal(const syntax::LiteralValue& literal);

  const Storage& storage() const { return storage_; }

  bool is_integer() const { return std::holds_alternative<std::int64_t>(storage_); }
  bool is_real() const { return std::holds_alternative<double>(storage_); }
  bool is_number() const { return is_integer() || is_real(); }
  bool is_boolean() const { return std::holds_alternative<bool>(storage_); }
  bool is_string() const { return std::holds_alternative<std::string>(storage_); }
  bool is_pair() const { return std::holds_alternative<std::shared_ptr<const Pair>>(storage_); }
  bool is_vector() const { return std::holds_alternative<std::shared_ptr<const VectorData>>(storage_); }
  bool is_reactor() const { return std::holds_alternative<ReactorValue>(storage_); }

  std::int64_t as_integer() const { return std::get<std::int64_t>(storage_); }
  double as_double() const;
  bool as_boolean() const { return std::get<bool>(storage_); }
  const std::string& as_string() const { return std::get<std::string>(storage_); }
  const Pair& as_pair() const { return *std::get<std::shared_ptr<const Pair>>(storage_); }
  const VectorData& as_vector() const { return *std::get<std::shared_ptr<const VectorData>>(storage_); }
  const ReactorValue& as_reactor() const { return std::get<ReactorValue>(storage_); }

  /// Everything except #f counts as true.
  bool truthy() const { return !is_boolean() || as_boolean(); }

  friend bool operator==(const Value& a, const Value& b);

 private:
  Storage storage_;
};

struct Pair {
  Value car;
  Value cdr;
};

/// Human-readable rendering: reals print with up to 15 significant digits.
std::string display(const Value& value);
/// Shortest representation that reads back to the same binary64.
std::string format_real(double value);
std::string_view type_name(const Value& value);

}  // namespace haai
