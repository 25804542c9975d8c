#include "photonshape/error.hpp"

namespace photonshape {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return "invalid_argument";
    case ErrorCode::Configuration:
      return "configuration";
    case ErrorCode::DegenerateDenominator:
      return "degenerate_denominator";
    case ErrorCode::NotNormalized:
      return "not_normalized";
    case ErrorCode::WindowTooSmall:
      return "window_too_small";
    case ErrorCode::GridMismatch:
      return "grid_mismatch";
    case ErrorCode::IntegratorFailure:
      return "integrator_failure";
    case ErrorCode::MultimodeSignal:
      return "multimode_signal";
    case ErrorCode::FitFailure:
      return "fit_failure";
    case ErrorCode::Io:
      return "io";
  }
  return "unknown";
}

}  // namespace photonshape
