#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cj {

enum class ErrorCode {
  kInvalidPair,
  kUnknownItem,
  kInvalidPosterior,
  kInvalidArgument,
  kMustUseMonteCarlo,
  kInvalidScheme,
  kNotEnoughItems,
  kInvalidState,
  kInvalidRanking,
  kInvalidDistribution,
  kNormalization,
  kPairing,
  kConfig,
  kIo,
  kMissingCell,
  kValidation,
  kConflict,
  kNotFound,
  kParse,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this type; `code()` lets callers
// (HTTP layer, CLI) map them onto their own status conventions.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cj
