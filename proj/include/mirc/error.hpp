#pragma once

#include <stdexcept>
#include <string>

namespace mirc {

enum class ErrorCode {
  kMissingFile,
  kMalformedHeader,
  kUnsupportedFormat,
  kUnsupportedMaxval,
  kTruncatedData,
  kIo,
  kReductionExhausted,
  kImageTooSmall,
  kKindMismatch,
  kUnknownComponent,
  kInvalidModel,
  kUninterpretable,
  kUseBeam,
  kInvalidArgument,
  kNoGroundedPositives,
  kIndexOutOfRange,
  kNothingToEvaluate,
  kPlacementFailed,
  kInvalidConfig,
};

const char* to_string(ErrorCode code);

/// Every failure in the library is reported through this type; callers that
/// care about the cause switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mirc
