#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace condred {

enum class ErrorKind {
  invalid_dimension,
  insufficient_quadrature,
  length_mismatch,
  negative_order,
  no_convergence,
  singular_jacobian,
  caustic_reached,
  boundary_decay,
  spectral_decay,
  grid_mismatch,
  time_mismatch,
  dt_cap,
  nonpositive_input,
  unsupported_dimension,
  insufficient_theta_samples,
  catalog_mismatch,
  invalid_argument,
  too_few_points,
  parse_error,
  validation_error,
  io_failure,
  cell_failure,
};

std::string_view to_string(ErrorKind kind);

/// True for failures that come from the numerics (caustics, stability caps,
/// decay violations) rather than from bad input or I/O.
bool is_numerical(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace condred
