#include "dropwarn/error.hpp"

namespace dropwarn {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kEmptyInput: return "empty_input";
    case ErrorKind::kInsufficientData: return "insufficient_data";
    case ErrorKind::kOutOfRange: return "out_of_range";
    case ErrorKind::kUnresolvedStatus: return "unresolved_status";
    case ErrorKind::kMisuse: return "misuse";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kEmptyPositive: return "empty_positive";
    case ErrorKind::kDegenerateData: return "degenerate_data";
    case ErrorKind::kData: return "data";
    case ErrorKind::kUndefinedMetric: return "undefined_metric";
    case ErrorKind::kCalibration: return "calibration";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kUsage: return "usage";
  }
  return "unknown";
}

}  // namespace dropwarn
