#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kpqg {

enum class ErrorCode {
  InvalidArgument,
  UnfinishedSequence,
  EmptyCorpus,
  LengthMismatch,
  AlreadyComplete,
  RemoteUnavailable,
  ScriptExhausted,
  EmptyQuestion,
  ScorerFailure,
  RankingMismatch,
  ScheduleMismatch,
  FileMissing,
  MalformedLine,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; code() identifies the
// failure class so callers (CLI exit codes, HTTP status mapping) can branch.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kpqg
