#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridshape {

enum class ErrorCode {
  InvalidInput,
  DisconnectedGraph,
  NonPositiveWeight,
  EigensolveFailure,
  AlgebraicLoop,
  NonFiniteState,
  NadirConditionViolated,
  BranchJump,
  NotSettled,
  InfeasibleDecayTarget,
  CoiDroopExceedsRelaxedBound,
  UnknownCase,
};

std::string_view to_string(ErrorCode code);

// Numeric failures (as opposed to bad input) map to exit status 2 / HTTP 500.
bool is_numeric_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace gridshape
