#include "secaudit/errors.hpp"

namespace secaudit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::ExpectationMismatch: return "ExpectationMismatch";
    case ErrorCode::UnparseableOutput: return "UnparseableOutput";
    case ErrorCode::DuplicateToolName: return "DuplicateToolName";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::DisallowedCommand: return "DisallowedCommand";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::NonZeroExit: return "NonZeroExit";
    case ErrorCode::FixtureMiss: return "FixtureMiss";
    case ErrorCode::SpawnFailed: return "SpawnFailed";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::NoRulesExtracted: return "NoRulesExtracted";
    case ErrorCode::SinkUnavailable: return "SinkUnavailable";
    case ErrorCode::MissingUserName: return "MissingUserName";
    case ErrorCode::UnparseableDate: return "UnparseableDate";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::FutureDate: return "FutureDate";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::FixtureMissing: return "FixtureMissing";
    case ErrorCode::ScriptMissing: return "ScriptMissing";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace secaudit
