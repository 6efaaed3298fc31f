#include "paraeval/error.hpp"

namespace paraeval {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::DegenerateHumanScores: return "DegenerateHumanScores";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::TooFewInstances: return "TooFewInstances";
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::TooFewGroups: return "TooFewGroups";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::DuplicateRecord: return "DuplicateRecord";
    case ErrorCode::InconsistentGroup: return "InconsistentGroup";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::MissingEmbedding: return "MissingEmbedding";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyEmbeddings: return "EmptyEmbeddings";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyGrid:
      return ErrorCategory::Usage;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::MissingEmbedding:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::EmptyEmbeddings:
      return ErrorCategory::Provider;
    default:
      return ErrorCategory::Data;
  }
}

namespace {

std::string decorate(ErrorCode code, const std::string& message, std::optional<std::size_t> line) {
  std::string out{to_string(code)};
  if (line) out += " at line " + std::to_string(*line);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, message, line)), code_(code), line_(line) {}

}  // namespace paraeval
