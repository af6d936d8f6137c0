#include "logitpfa/error.hpp"

namespace logitpfa {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
    case ErrorKind::kSeparationDetected: return "SeparationDetected";
    case ErrorKind::kNoConvergence: return "NoConvergence";
    case ErrorKind::kSingularInformation: return "SingularInformation";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kZeroVariance: return "ZeroVariance";
    case ErrorKind::kNotSymmetric: return "NotSymmetric";
    case ErrorKind::kRankDeficientDesign: return "RankDeficientDesign";
    case ErrorKind::kInvalidThreshold: return "InvalidThreshold";
    case ErrorKind::kEmptyGrid: return "EmptyGrid";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kTooFewColumns: return "TooFewColumns";
  }
  return "Unknown";
}

}  // namespace logitpfa
