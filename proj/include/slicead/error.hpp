#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slicead {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kConfig,
  // link_capacity
  kMalformedRow,
  kNonMonotonicTime,
  kGapInTrace,
  kEmptyTrace,
  // forecast
  kEmptyHistory,
  kTooFewSamples,
  kDegenerateRow,
  kMissingHorizonStep,
  kNonPositiveVariance,
  kDuplicateRow,
  // slicing
  kTooFewFlows,
  kMissingService,
  kUnknownService,
  // oracle / engine
  kInstanceTooLarge,
  kForecastMissing,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures in the library surface as this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace slicead
