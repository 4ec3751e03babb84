#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace haai {

struct SourceSpan {
  std::string file;
  std::uint32_t line = 1;
  std::uint32_t column = 1;
  std::uint32_t length = 0;

  std::string to_string() const;
};

enum class ErrorCode {
  // reader
  UnbalancedParens,
  InvalidNumber,
  UnterminatedString,
  // parser
  NotADefinition,
  MalformedDefr,
  MalformedDef,
  DuplicateParam,
  DuplicateReactor,
  BarWithoutTrampolines,
  MissingTrampolineUpdates,
  MalformedIf,
  MalformedRho,
  EmptyDeploy,
  MisplacedKeyword,
  // runtime
  UnboundIdentifier,
  ArityMismatch,
  NotAReactor,
  NotConstant,
  DepthExceeded,
  MultiSinkArityMismatch,
  PrimitiveError,
  NotASource,
  // io
  QueueClosed,
  ConnectFailed,
  BadPayload,
  BadScript,
  FileNotFound,
  WriteFailed,
  // analysis
  UnknownReactor,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a code and, when it can be
/// attributed to source text, the span of the offending form.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, SourceSpan span = {});

  ErrorCode code() const noexcept { return code_; }
  const SourceSpan& span() const noexcept { return span_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  SourceSpan span_;
  std::string detail_;
};

}  // namespace haai
