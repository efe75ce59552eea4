#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gece {

enum class ErrorCode {
  kSumOutOfTolerance,
  kEntryOutOfRange,
  kIndexOutOfRange,
  kNonFiniteInput,
  kInvalidLensForK,
  kPartialMap,
  kEmptyGroup,
  kInvalidClassIndex,
  kInvalidSelector,
  kDimensionMismatch,
  kInterIntervalOnNonScalar,
  kNonPSDMatrix,
  kInvalidDistance,
  kInvalidBinning,
  kEmptySelection,
  kDistanceLensMismatch,
  kFractionTooSmall,
  kMissingLogits,
  kDegenerateValidation,
  kInvalidSpec,
  kInvalidCalibrator,
  kEmptyDataset,
  kInconsistentWidth,
  kParseError,
  kSimplexViolation,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as gece::Error; the code lets callers
// (and the CLI exit-status mapping) branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gece
