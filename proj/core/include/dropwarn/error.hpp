#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dropwarn {

enum class ErrorKind {
  kParse,
  kValidation,
  kSchema,
  kEmptyInput,
  kInsufficientData,
  kOutOfRange,
  kUnresolvedStatus,
  kMisuse,
  kDomain,
  kEmptyPositive,
  kDegenerateData,
  kData,
  kUndefinedMetric,
  kCalibration,
  kIo,
  kUsage,
};

std::string_view ErrorKindName(ErrorKind kind);

// All library failures surface as this exception type; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dropwarn
