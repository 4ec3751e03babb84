#pragma once

#include <json.hpp>

#include "haai/core/value.hpp"

namespace haai {

using Json = nlohmann::ordered_json;

/// Numbers keep their exactness; reals serialize with the shortest
/// round-trip representation. Pairs become {"car":..,"cdr":..}, vectors
/// arrays, reactors {"reactor": name}.
Json to_json(const Value& value);

/// Inverse of to_json for the data subset; arrays decode to vectors.
/// Throws BadPayload for null or reactor objects.
Value value_from_json(const Json& json);

}  // namespace haai
