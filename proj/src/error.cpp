#include "mcivoice/error.hpp"

namespace mcivoice {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kFileUnreadable: return "file unreadable";
    case ErrorCode::kNotPcm: return "not PCM";
    case ErrorCode::kEmptyAudio: return "empty audio";
    case ErrorCode::kUnsupportedFormat: return "unsupported format";
    case ErrorCode::kSignalTooShort: return "signal too short";
    case ErrorCode::kEmptyStreams: return "empty streams";
    case ErrorCode::kMalformedCsv: return "malformed CSV";
    case ErrorCode::kMalformedModel: return "malformed model file";
    case ErrorCode::kDuplicateFeature: return "duplicate feature";
    case ErrorCode::kUnknownLabel: return "unknown label";
    case ErrorCode::kNoFeaturesSurvive: return "no features survive";
    case ErrorCode::kSmoNotConverged: return "SMO did not converge";
    case ErrorCode::kNonFiniteLoss: return "non-finite loss";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kClassTooSmall: return "class too small";
    case ErrorCode::kIo: return "I/O error";
  }
  return "unknown";
}

}  // namespace mcivoice
