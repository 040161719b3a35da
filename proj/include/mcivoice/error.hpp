#pragma once

#include <stdexcept>
#include <string>

namespace mcivoice {

enum class ErrorCode {
  kInvalidArgument,
  kFileUnreadable,
  kNotPcm,
  kEmptyAudio,
  kUnsupportedFormat,
  kSignalTooShort,
  kEmptyStreams,
  kMalformedCsv,
  kMalformedModel,
  kDuplicateFeature,
  kUnknownLabel,
  kNoFeaturesSurvive,
  kSmoNotConverged,
  kNonFiniteLoss,
  kDimensionMismatch,
  kClassTooSmall,
  kIo,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mcivoice
