#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hexplain {

enum class ErrorCode {
  kInvalidArgument,
  kMalformedClause,
  kSatisfiableInput,
  kEmptySetMember,
  kMalformedInput,
  kInconsistentDecision,
  kUnsupportedMode,
  kDimensionMismatch,
  kEmptyDataset,
  kInvalidEpsilon,
  kTooLarge,
  kPredictionMismatch,
  kDegenerateSystem,
  kTooManyFeatures,
  kEmptyInput,
  kBadMagic,
  kTruncatedFile,
  kCountMismatch,
  kParseError,
  kIoError,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this type. kInternal marks a
// broken invariant inside the library; every other code is a caller or data
// problem.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace hexplain
