#pragma once

#include <map>
#include <string>

#include "haai/core/model.hpp"
#include "haai/syntax/ast.hpp"

namespace haai::analysis {

struct Resolved {
  enum Kind { None, Named, Primitive, Io, Other } kind = None;
  const syntax::ReactorDef* def = nullptr;
  const PrimitiveSpec* primitive = nullptr;
};

/// Program reactors shadow library entries of the same name.
class Universe {
 public:
  Universe(const syntax::Program& program, const ReactorTable* library);
  Resolved resolve(std::string_view name) const;

 private:
  std::map<std::string, const syntax::ReactorDef*, std::less<>> program_;
  const ReactorTable* library_;
};

}  // namespace haai::analysis
