#include "haai/error.hpp"

namespace haai {

std::string SourceSpan::to_string() const {
  std::string out = file.empty() ? std::string("<input>") : file;
  out += ':' + std::to_string(line) + ':' + std::to_string(column);
  return out;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnbalancedParens: return "UnbalancedParens";
    case ErrorCode::InvalidNumber: return "InvalidNumber";
    case ErrorCode::UnterminatedString: return "UnterminatedString";
    case ErrorCode::NotADefinition: return "NotADefinition";
    case ErrorCode::MalformedDefr: return "MalformedDefr";
    case ErrorCode::MalformedDef: return "MalformedDef";
    case ErrorCode::DuplicateParam: return "DuplicateParam";
    case ErrorCode::DuplicateReactor: return "DuplicateReactor";
    case ErrorCode::BarWithoutTrampolines: return "BarWithoutTrampolines";
    case ErrorCode::MissingTrampolineUpdates: return "MissingTrampolineUpdates";
    case ErrorCode::MalformedIf: return "MalformedIf";
    case ErrorCode::MalformedRho: return "MalformedRho";
    case ErrorCode::EmptyDeploy: return "EmptyDeploy";
    case ErrorCode::MisplacedKeyword: return "MisplacedKeyword";
    case ErrorCode::UnboundIdentifier: return "UnboundIdentifier";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::NotAReactor: return "NotAReactor";
    case ErrorCode::NotConstant: return "NotConstant";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::MultiSinkArityMismatch: return "MultiSinkArityMismatch";
    case ErrorCode::PrimitiveError: return "PrimitiveError";
    case ErrorCode::NotASource: return "NotASource";
    case ErrorCode::QueueClosed: return "QueueClosed";
    case ErrorCode::ConnectFailed: return "ConnectFailed";
    case ErrorCode::BadPayload: return "BadPayload";
    case ErrorCode::BadScript: return "BadScript";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::WriteFailed: return "WriteFailed";
    case ErrorCode::UnknownReactor: return "UnknownReactor";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message, const SourceSpan& span) {
  std::string out;
  if (span.line > 0 && (!span.file.empty() || span.length > 0)) {
    out += span.to_string() + ": ";
  }
  out += std::string(to_string(code));
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, std::string message, SourceSpan span)
    : std::runtime_error(format_message(code, message, span)),
      code_(code),
      span_(std::move(span)),
      detail_(std::move(message)) {}

}  // namespace haai
