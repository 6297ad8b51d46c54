#pragma once

/**
 * Error taxonomy for the ACPS engine.
 *
 * Every failure surfaces as acps::Error carrying a stable ErrorCode so
 * callers can branch on the condition without parsing message text.
 */

#include <stdexcept>
#include <string>

namespace acps {

enum class ErrorCode {
  // core
  EmptyAnswer,
  UnmappableChoice,
  DimensionMismatch,
  ZeroVector,
  // backend
  FixtureMiss,
  RemoteError,
  SafetyRefusal,
  EmptyInput,
  InvalidRequest,
  // router
  EmptyLogits,
  NonFiniteLogit,
  // trace engine
  AllTracesFailed,
  KTooLarge,
  InconsistentM,
  // demo bank
  DuplicateId,
  EmbeddingFailure,
  EmptyBank,
  LTooLarge,
  // estimator
  AllSamplesUnparseable,
  NoParseableSamples,
  WeightCountMismatch,
  WeightOutOfRange,
  LengthMismatch,
  EmptyScores,
  InvalidWeights,
  // eval harness
  ParseError,
  SchemaViolation,
  NoEvidence,
  EmptyPool,
  DisjointnessViolation,
  EmptyResults,
  EmptyLog,
  IoError,
  AggregateMismatch,
  // configuration
  ConfigError,
};

inline const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyAnswer: return "EmptyAnswer";
    case ErrorCode::UnmappableChoice: return "UnmappableChoice";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::FixtureMiss: return "FixtureMiss";
    case ErrorCode::RemoteError: return "RemoteError";
    case ErrorCode::SafetyRefusal: return "SafetyRefusal";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::EmptyLogits: return "EmptyLogits";
    case ErrorCode::NonFiniteLogit: return "NonFiniteLogit";
    case ErrorCode::AllTracesFailed: return "AllTracesFailed";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::InconsistentM: return "InconsistentM";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmbeddingFailure: return "EmbeddingFailure";
    case ErrorCode::EmptyBank: return "EmptyBank";
    case ErrorCode::LTooLarge: return "LTooLarge";
    case ErrorCode::AllSamplesUnparseable: return "AllSamplesUnparseable";
    case ErrorCode::NoParseableSamples: return "NoParseableSamples";
    case ErrorCode::WeightCountMismatch: return "WeightCountMismatch";
    case ErrorCode::WeightOutOfRange: return "WeightOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::NoEvidence: return "NoEvidence";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::DisjointnessViolation: return "DisjointnessViolation";
    case ErrorCode::EmptyResults: return "EmptyResults";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::AggregateMismatch: return "AggregateMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace acps
