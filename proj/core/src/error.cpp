#include "stratdepth/error.hpp"

namespace stratdepth {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kShapeError: return "ShapeError";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kInvalidFeature: return "InvalidFeature";
    case ErrorCode::kUnsupportedK: return "UnsupportedK";
    case ErrorCode::kDegenerateDisparity: return "DegenerateDisparity";
    case ErrorCode::kRankError: return "RankError";
    case ErrorCode::kAlignmentError: return "AlignmentError";
    case ErrorCode::kDegenerateTrajectory: return "DegenerateTrajectory";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kTruncatedError: return "TruncatedError";
    case ErrorCode::kManifestError: return "ManifestError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kValidationError: return "ValidationError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

}  // namespace stratdepth
