#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace paraeval {

enum class ErrorCode {
  InvalidArgument,
  EmptySequence,
  BothEmpty,
  DomainError,
  MissingReference,
  DegenerateDenominator,
  EmptyGrid,
  DegenerateHumanScores,
  LengthMismatch,
  ConstantInput,
  TooFewInstances,
  TooFewPairs,
  TooFewGroups,
  ParseError,
  ScoreOutOfRange,
  DuplicateRecord,
  InconsistentGroup,
  IoError,
  ProviderUnavailable,
  MissingEmbedding,
  DimensionMismatch,
  EmptyEmbeddings,
};

/// How a failure should surface at the command line.
enum class ErrorCategory { Usage, Data, Provider };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

/// Every recoverable failure in the toolkit is reported through this type.
/// `line()` is set for errors tied to a position in an input file.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace paraeval
