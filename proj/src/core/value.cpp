#include <charconv>
#include <cmath>
#include <cstdio>

#include "haai/core/json.hpp"
#include "haai/core/value.hpp"

namespace haai {

ReactorValue ReactorValue::primitive(std::shared_ptr<const PrimitiveSpec> spec) { return ReactorValue(Impl(std::move(spec))); }
ReactorValue ReactorValue::named(syntax::ReactorDefPtr def) { return ReactorValue(Impl(std::move(def))); }
ReactorValue ReactorValue::capture(std::shared_ptr<const Capture> capture) { return ReactorValue(Impl(std::move(capture))); }
ReactorValue ReactorValue::io(std::shared_ptr<const IoReactorSpec> spec) { return ReactorValue(Impl(std::move(spec))); }

ReactorValue::Kind ReactorValue::kind() const { return static_cast<Kind>(impl_.index()); }

const void* ReactorValue::identity() const {
  return std::visit([](const auto& p) -> const void* { return p.get(); }, impl_);
}

std::string ReactorValue::name() const {
  switch (kind()) {
    case Kind::Primitive: return as_primitive().name;
    case Kind::Named: return as_named().name;
    case Kind::Capture: return "rho";
    case Kind::Io: return as_io().name;
  }
  return {};
}

std::size_t ReactorValue::arity() const {
  switch (kind()) {
    case Kind::Primitive: return as_primitive().arity;
    case Kind::Named: return as_named().params.size();
    case Kind::Capture: return as_capture().rho().params.size();
    case Kind::Io: return as_io().arity;
  }
  return 0;
}

bool ReactorValue::variadic() const { return kind() == Kind::Primitive && as_primitive().variadic; }

std::size_t ReactorValue::sink_count() const {
  switch (kind()) {
    case Kind::Primitive: return as_primitive().sink_count;
    case Kind::Named: return as_named().body.sinks.size();
    case Kind::Capture: return as_capture().rho().body.sinks.size();
    case Kind::Io: return 1;
  }
  return 1;
}

Value Value::pair(Value car, Value cdr) {
  Value v;
  v.storage_ = std::make_shared<const Pair>(Pair{std::move(car), std::move(cdr)});
  return v;
}

Value Value::vector(VectorData items) {
  Value v;
  v.storage_ = std::make_shared<const VectorData>(std::move(items));
  return v;
}

Value Value::from_literal(const syntax::LiteralValue& literal) {
  return std::visit([](const auto& x) { return Value(x); }, literal);
}

double Value::as_double() const {
  if (is_integer()) return static_cast<double>(as_integer());
  return std::get<double>(storage_);
}

bool operator==(const Value& a, const Value& b) {
  if (a.storage_.index() != b.storage_.index()) return false;
  if (a.is_pair()) return a.as_pair().car == b.as_pair().car && a.as_pair().cdr == b.as_pair().cdr;
  if (a.is_vector()) return a.as_vector() == b.as_vector();
  return a.storage_ == b.storage_;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "+nan.0";
  if (std::isinf(value)) return value > 0 ? "+inf.0" : "-inf.0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string out(buf, ptr);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

namespace {

std::string display_real(double value) {
  if (!std::isfinite(value)) return format_real(value);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", value);
  std::string out(buf);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string display(const Value& value) {
  if (value.is_integer()) return std::to_string(value.as_integer());
  if (value.is_real()) return display_real(value.as_double());
  if (value.is_boolean()) return value.as_boolean() ? "#t" : "#f";
  if (value.is_string()) return quote(value.as_string());
  if (value.is_pair()) return "(" + display(value.as_pair().car) + " . " + display(value.as_pair().cdr) + ")";
  if (value.is_vector()) {
    std::string out = "#(";
    bool first = true;
    for (const auto& v : value.as_vector()) {
      if (!first) out += ' ';
      first = false;
      out += display(v);
    }
    return out + ")";
  }
  return "#<reactor " + value.as_reactor().name() + ">";
}

std::string_view type_name(const Value& value) {
  if (value.is_integer() || value.is_real()) return "number";
  if (value.is_boolean()) return "boolean";
  if (value.is_string()) return "string";
  if (value.is_pair()) return "pair";
  if (value.is_vector()) return "vector";
  return "reactor";
}

Json to_json(const Value& value) {
  if (value.is_integer()) return value.as_integer();
  if (value.is_real()) {
    double d = value.as_double();
    if (!std::isfinite(d)) return format_real(d);
    return d;
  }
  if (value.is_boolean()) return value.as_boolean();
  if (value.is_string()) return value.as_string();
  if (value.is_pair()) {
    Json j = Json::object();
    j["car"] = to_json(value.as_pair().car);
    j["cdr"] = to_json(value.as_pair().cdr);
    return j;
  }
  if (value.is_vector()) {
    Json j = Json::array();
    for (const auto& v : value.as_vector()) j.push_back(to_json(v));
    return j;
  }
  Json j = Json::object();
  j["reactor"] = value.as_reactor().name();
  return j;
}

Value value_from_json(const Json& json) {
  switch (json.type()) {
    case Json::value_t::number_integer: return Value(json.get<std::int64_t>());
    case Json::value_t::number_unsigned: {
      auto u = json.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(INT64_MAX)) return Value(static_cast<double>(u));
      return Value(static_cast<std::int64_t>(u));
    }
    case Json::value_t::number_float: return Value(json.get<double>());
    case Json::value_t::boolean: return Value(json.get<bool>());
    case Json::value_t::string: return Value(json.get<std::string>());
    case Json::value_t::array: {
      VectorData items;
      for (const auto& x : json) items.push_back(value_from_json(x));
      return Value::vector(std::move(items));
    }
    case Json::value_t::object:
      if (json.size() == 2 && json.contains("car") && json.contains("cdr")) {
        return Value::pair(value_from_json(json["car"]), value_from_json(json["cdr"]));
      }
      break;
    default: break;
  }
  throw Error(ErrorCode::BadPayload, "unsupported JSON payload: " + json.dump());
}

}  // namespace haai
