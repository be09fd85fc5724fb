#include "gridshape/error.hpp"

namespace gridshape {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::EigensolveFailure: return "EigensolveFailure";
    case ErrorCode::AlgebraicLoop: return "AlgebraicLoop";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::NadirConditionViolated: return "NadirConditionViolated";
    case ErrorCode::BranchJump: return "BranchJump";
    case ErrorCode::NotSettled: return "NotSettled";
    case ErrorCode::InfeasibleDecayTarget: return "InfeasibleDecayTarget";
    case ErrorCode::CoiDroopExceedsRelaxedBound: return "CoiDroopExceedsRelaxedBound";
    case ErrorCode::UnknownCase: return "UnknownCase";
  }
  return "Unknown";
}

bool is_numeric_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::EigensolveFailure:
    case ErrorCode::NonFiniteState:
    case ErrorCode::BranchJump:
    case ErrorCode::NotSettled:
      return true;
    default:
      return false;
  }
}

}  // namespace gridshape
