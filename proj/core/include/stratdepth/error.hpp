#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stratdepth {

enum class ErrorCode {
  kEmptyMask,
  kShapeError,
  kEmptyInput,
  kInsufficientData,
  kInvalidFeature,
  kUnsupportedK,
  kDegenerateDisparity,
  kRankError,
  kAlignmentError,
  kDegenerateTrajectory,
  kFormatError,
  kTruncatedError,
  kManifestError,
  kIoError,
  kValidationError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above, so
/// callers can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace stratdepth
