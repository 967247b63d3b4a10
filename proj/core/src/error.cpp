#include "hexplain/error.hpp"

namespace hexplain {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformedClause: return "MalformedClause";
    case ErrorCode::kSatisfiableInput: return "SatisfiableInput";
    case ErrorCode::kEmptySetMember: return "EmptySetMember";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kInconsistentDecision: return "InconsistentDecision";
    case ErrorCode::kUnsupportedMode: return "UnsupportedMode";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInvalidEpsilon: return "InvalidEpsilon";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kPredictionMismatch: return "PredictionMismatch";
    case ErrorCode::kDegenerateSystem: return "DegenerateSystem";
    case ErrorCode::kTooManyFeatures: return "TooManyFeatures";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

}  // namespace hexplain
