#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "haai/core/model.hpp"

namespace haai::stdlib {

/// Largest string or vector a primitive will build; keeps every shipped
/// primitive constant-time.
inline constexpr std::size_t kMaxSize = 4096;

const std::vector<std::shared_ptr<const PrimitiveSpec>>& primitives();
const std::vector<std::shared_ptr<const IoReactorSpec>>& io_reactors();

std::size_t register_primitives(ReactorTable& table);
std::size_t register_io_reactors(ReactorTable& table);

std::string_view prelude_source();
std::string_view examples_source();

/// Parses `text` and registers its reactors; signal definitions are
/// rejected. Returns the number of reactors registered.
std::size_t load_source(ReactorTable& table, std::string_view text, std::string_view file);
std::size_t load_prelude(ReactorTable& table);
std::size_t load_examples(ReactorTable& table);

/// Primitives, data producing/consuming reactors and the prelude.
void install(ReactorTable& table);

}  // namespace haai::stdlib
