#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "haai/error.hpp"

namespace haai::syntax {

struct Symbol {
  std::string name;
  bool operator==(const Symbol&) const = default;
};

struct Datum;
using DatumList = std::vector<Datum>;

/// One S-expression node. Numbers keep their exactness: integer literals
/// read as int64, anything with a fraction or exponent as binary64.
struct Datum {
  std::variant<Symbol, std::int64_t, double, bool, std::string, DatumList> value;
  SourceSpan span;

  bool is_symbol() const { return std::holds_alternative<Symbol>(value); }
  bool is_symbol(std::string_view name) const {
    const auto* s = std::get_if<Symbol>(&value);
    return s != nullptr && s->name == name;
  }
  bool is_list() const { return std::holds_alternative<DatumList>(value); }
  const std::string& symbol() const { return std::get<Symbol>(value).name; }
  const DatumList& list() const { return std::get<DatumList>(value); }
};

/// Reads every top-level datum of `text`. `;` starts a comment running to
/// the end of the line. `|` is always a token of its own.
std::vector<Datum> read_data(std::string_view text, std::string_view file = {});

}  // namespace haai::syntax
