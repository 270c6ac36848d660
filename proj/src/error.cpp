#include "condred/error.hpp"

namespace condred {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::insufficient_quadrature: return "insufficient-quadrature";
    case ErrorKind::length_mismatch: return "length-mismatch";
    case ErrorKind::negative_order: return "negative-order";
    case ErrorKind::no_convergence: return "no-convergence";
    case ErrorKind::singular_jacobian: return "singular-jacobian";
    case ErrorKind::caustic_reached: return "caustic-reached";
    case ErrorKind::boundary_decay: return "boundary-decay";
    case ErrorKind::spectral_decay: return "spectral-decay";
    case ErrorKind::grid_mismatch: return "grid-mismatch";
    case ErrorKind::time_mismatch: return "time-mismatch";
    case ErrorKind::dt_cap: return "dt-cap";
    case ErrorKind::nonpositive_input: return "nonpositive-input";
    case ErrorKind::unsupported_dimension: return "unsupported-dimension";
    case ErrorKind::insufficient_theta_samples: return "insufficient-theta-samples";
    case ErrorKind::catalog_mismatch: return "catalog-mismatch";
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::too_few_points: return "too-few-points";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::validation_error: return "validation-error";
    case ErrorKind::io_failure: return "io-failure";
    case ErrorKind::cell_failure: return "cell-failure";
  }
  return "unknown";
}

bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::no_convergence:
    case ErrorKind::singular_jacobian:
    case ErrorKind::caustic_reached:
    case ErrorKind::boundary_decay:
    case ErrorKind::spectral_decay:
    case ErrorKind::dt_cap:
    case ErrorKind::cell_failure:
      return true;
    default:
      return false;
  }
}

}  // namespace condred
