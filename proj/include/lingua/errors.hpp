#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lingua {

enum class ErrorCode {
  InvalidArgument,
  InvalidSchema,
  InvalidRecord,
  UnsupportedFormat,
  IncompleteAnswers,
  UnknownOption,
  ConflictingDuplicateUser,
  EmptyHistory,
  EmptySymbol,
  EmptyStore,
  UnknownId,
  DuplicateId,
  EmptyDefinition,
  SelfReference,
  CycleDetected,
  UnknownBaseSymbol,
  UnknownFocusCategory,
  MismatchedIdSets,
  DegenerateConstantRanking,
  NonSymmetricInput,
  DimensionUnsupported,
  LengthMismatch,
  InvalidDistribution,
  InvalidLexicon,
  ModelNotLoaded,
  NotFound,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures surface as this exception. `detail` carries
// multi-item diagnostics (one per line) when an operation reports
// every problem rather than the first.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace lingua
