#include "lingua/errors.hpp"

namespace lingua {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSchema: return "InvalidSchema";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::IncompleteAnswers: return "IncompleteAnswers";
    case ErrorCode::UnknownOption: return "UnknownOption";
    case ErrorCode::ConflictingDuplicateUser: return "ConflictingDuplicateUser";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::EmptySymbol: return "EmptySymbol";
    case ErrorCode::EmptyStore: return "EmptyStore";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyDefinition: return "EmptyDefinition";
    case ErrorCode::SelfReference: return "SelfReference";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::UnknownBaseSymbol: return "UnknownBaseSymbol";
    case ErrorCode::UnknownFocusCategory: return "UnknownFocusCategory";
    case ErrorCode::MismatchedIdSets: return "MismatchedIdSets";
    case ErrorCode::DegenerateConstantRanking: return "DegenerateConstantRanking";
    case ErrorCode::NonSymmetricInput: return "NonSymmetricInput";
    case ErrorCode::DimensionUnsupported: return "DimensionUnsupported";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidLexicon: return "InvalidLexicon";
    case ErrorCode::ModelNotLoaded: return "ModelNotLoaded";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lingua
