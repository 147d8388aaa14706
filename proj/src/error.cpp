#include "kpqg/error.hpp"

namespace kpqg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnfinishedSequence: return "UnfinishedSequence";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::AlreadyComplete: return "AlreadyComplete";
    case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::EmptyQuestion: return "EmptyQuestion";
    case ErrorCode::ScorerFailure: return "ScorerFailure";
    case ErrorCode::RankingMismatch: return "RankingMismatch";
    case ErrorCode::ScheduleMismatch: return "ScheduleMismatch";
    case ErrorCode::FileMissing: return "FileMissing";
    case ErrorCode::MalformedLine: return "MalformedLine";
  }
  return "Unknown";
}

}  // namespace kpqg
