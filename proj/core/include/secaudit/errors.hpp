#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace secaudit {

enum class ErrorCode {
  // llm_backend
  NetworkError,
  AuthError,
  RateLimited,
  MalformedResponse,
  ScriptExhausted,
  ExpectationMismatch,
  // agent_core
  UnparseableOutput,
  // tools
  DuplicateToolName,
  UnknownTool,
  DisallowedCommand,
  Timeout,
  NonZeroExit,
  FixtureMiss,
  SpawnFailed,
  FileNotFound,
  NoRulesExtracted,
  SinkUnavailable,
  // windows_parsers
  MissingUserName,
  UnparseableDate,
  MissingField,
  // compliance_engine
  FutureDate,
  UnknownParameter,
  // scenario_harness
  FixtureMissing,
  ScriptMissing,
  // shared
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. Callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace secaudit
