#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace logitpfa {

enum class ErrorKind {
  kDegenerateInput,
  kSeparationDetected,
  kNoConvergence,
  kSingularInformation,
  kShapeMismatch,
  kZeroVariance,
  kNotSymmetric,
  kRankDeficientDesign,
  kInvalidThreshold,
  kEmptyGrid,
  kInvalidConfig,
  kParseError,
  kTooFewColumns,
};

/// Stable name used in reports and logs, e.g. "DegenerateInput".
std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers can decide per class whether to drop a column or abort.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace logitpfa
