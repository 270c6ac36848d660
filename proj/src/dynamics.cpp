#include "condred/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "condred/error.hpp"
#include "condred/nonlinearity.hpp"

namespace condred {

namespace {

constexpr Complex kI(0.0, 1.0);

void check_dt(const SolverParams& params, double cap) {
  if (!(params.dt > 0.0)) throw Error(ErrorKind::invalid_argument, "solver: dt must be positive");
  if (params.dt > cap * (1.0 + 1e-12)) {
    throw Error(ErrorKind::dt_cap, "dt = " + std::to_string(params.dt) + " exceeds the stability/accuracy cap " +
                                       std::to_string(cap));
  }
  if (!(params.t_final > 0.0)) throw Error(ErrorKind::invalid_argument, "solver: t_final must be positive");
  if (params.record_every < 1) throw Error(ErrorKind::invalid_argument, "solver: record_every must be >= 1");
}

void check_record(const Field& field, const HermiteBasis& basis) {
  check_boundary_decay(field, "solver");
  check_spectral_decay(field, basis, "solver");
}

}  // namespace

std::string_view to_string(Equation eq) {
  switch (eq) {
    case Equation::gpe_full: return "gpe_full";
    case Equation::env_full: return "env_full";
    case Equation::env_averaged: return "env_averaged";
    case Equation::env_oscillatory: return "env_oscillatory";
    case Equation::env_limit: return "env_limit";
  }
  return "unknown";
}

std::optional<Equation> equation_from_string(std::string_view name) {
  for (auto eq : {Equation::gpe_full, Equation::env_full, Equation::env_averaged, Equation::env_oscillatory,
                  Equation::env_limit}) {
    if (to_string(eq) == name) return eq;
  }
  return std::nullopt;
}

bool is_oscillatory(Equation eq) {
  return eq == Equation::gpe_full || eq == Equation::env_full || eq == Equation::env_oscillatory;
}

bool has_dispersion(Equation eq) {
  return eq == Equation::gpe_full || eq == Equation::env_full || eq == Equation::env_averaged;
}

double scaling_beta(double epsilon, double alpha, int n, int d) {
  if (!(epsilon > 0.0) || !(alpha > 0.0)) {
    throw Error(ErrorKind::nonpositive_input, "scaling_beta: epsilon and alpha must be positive");
  }
  return std::pow(epsilon, d) * std::pow(alpha, -0.5 * n);
}

double alpha_from_beta(double epsilon, double beta, int n, int d) {
  if (!(epsilon > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorKind::nonpositive_input, "alpha_from_beta: epsilon and beta must be positive");
  }
  return std::pow(epsilon, 2.0 * d / n) * std::pow(beta, -2.0 / n);
}

double dt_cap(Equation eq, double epsilon, double alpha, const GridSpec& grid, double max_grad_s) {
  double cap = std::numeric_limits<double>::infinity();
  if (is_oscillatory(eq)) cap = std::min(cap, epsilon * epsilon / 20.0);
  if (eq == Equation::gpe_full) return cap;
  if (has_dispersion(eq) && alpha > 0.0) {
    const double xi_max = std::numbers::pi / grid.dx();
    cap = std::min(cap, 2.5 / (alpha * xi_max * xi_max / 2.0));
  }
  if (max_grad_s > 0.0) cap = std::min(cap, grid.dx() / (2.0 * max_grad_s));
  return cap;
}

double max_phase_speed(const GridSpec& grid, const InitialPhase& s0, double t_final, const EikonalOptions& options) {
  PhaseProvider provider(grid, s0, options);
  double speed = 0.0;
  const int samples = 16;
  for (int k = 0; k <= samples; ++k) {
    const PhaseField& ph = provider.at(t_final * k / samples);
    for (Eigen::Index p = 0; p < ph.grad_s.cols(); ++p) speed = std::max(speed, ph.grad_s.col(p).norm());
  }
  return speed;
}

int step_count(double t_final, double dt) {
  return std::max(1, static_cast<int>(std::ceil(t_final / dt - 1e-9)));
}

double aligned_dt(double t_final, double target, int records) {
  if (records < 1) throw Error(ErrorKind::invalid_argument, "aligned_dt: records must be >= 1");
  int steps = step_count(t_final, target);
  steps = ((steps + records - 1) / records) * records;
  return t_final / steps;
}

// ---------------------------------------------------------------------------
// GPE: Strang splitting with exact substeps.

Trajectory solve_gpe(const Field& psi0, const SolverParams& params, const HermiteBasis& basis) {
  if (params.equation != Equation::gpe_full) {
    throw Error(ErrorKind::invalid_argument, "solve_gpe requires equation = gpe_full");
  }
  if (!(params.epsilon > 0.0) || !(params.alpha > 0.0)) {
    throw Error(ErrorKind::nonpositive_input, "solve_gpe: epsilon and alpha must be positive");
  }
  const GridSpec& grid = psi0.grid;
  check_basis(grid, basis);
  check_dt(params, dt_cap(Equation::gpe_full, params.epsilon, params.alpha, grid, 0.0));

  const int steps = step_count(params.t_final, params.dt);
  const double dt = params.t_final / steps;
  const double eps2 = params.epsilon * params.epsilon;
  const double alpha = params.alpha;
  const int modes = basis.mode_count();
  const int points = grid.num_points();

  SpectralX spec(grid, modes);
  const auto& xi = spec.wavenumbers();
  const auto eig = basis.eigenvalues();

  // half-step multiplier of the linear flow, diagonal in (xi, k)
  Eigen::MatrixXcd linear_half(modes, points);
  for (int p = 0; p < points; ++p) {
    const auto idx = grid.point_index(p);
    double xi2 = xi[idx[0]] * xi[idx[0]];
    if (grid.dim_n == 2) xi2 += xi[idx[1]] * xi[idx[1]];
    for (int k = 0; k < modes; ++k) {
      linear_half(k, p) = std::polar(1.0, -0.5 * dt * (eig[k] / eps2 + 0.5 * alpha * xi2));
    }
  }
  Eigen::VectorXcd potential(points);
  for (int p = 0; p < points; ++p) {
    potential(p) = std::polar(1.0, -dt * grid.position(p).squaredNorm() / (2.0 * alpha));
  }

  auto linear = [&](Eigen::MatrixXcd& c) {
    Eigen::MatrixXcd hat = spec.forward(c);
    hat.array() *= linear_half.array();
    c = spec.backward(hat);
  };
  auto nonlinear = [&](Eigen::MatrixXcd& c) {
    Eigen::MatrixXcd v = to_node_values_batch(c, basis);
    for (Eigen::Index p = 0; p < v.cols(); ++p) {
      for (Eigen::Index j = 0; j < v.rows(); ++j) {
        const Complex u = v(j, p);
        v(j, p) = u * potential(p) * std::polar(1.0, -dt * params.nonlinear_strength * std::norm(u));
      }
    }
    c = to_coefficients_batch(v, basis);
  };

  Trajectory traj;
  traj.steps = steps;
  traj.dt = dt;
  Field state = psi0;
  check_record(state, basis);
  traj.records.push_back(state);
  for (int s = 1; s <= steps; ++s) {
    linear(state.data);
    nonlinear(state.data);
    linear(state.data);
    state.time = s * dt;
    if (s % params.record_every == 0 || s == steps) {
      check_record(state, basis);
      traj.records.push_back(state);
    }
  }
  traj.records.back().time = params.t_final;
  return traj;
}

// ---------------------------------------------------------------------------
// Envelope equations: RK4 with spectral x-derivatives.

Trajectory solve_envelope(const Field& a0, const SolverParams& params, PhaseProvider& phase,
                          const HermiteBasis& basis) {
  const double speed = max_phase_speed(phase.grid(), phase.initial_phase(), params.t_final, phase.options());
  return solve_envelope(a0, params, phase, basis, speed);
}

Trajectory solve_envelope(const Field& a0, const SolverParams& params, PhaseProvider& phase,
                          const HermiteBasis& basis, double max_grad_s) {
  const Equation eq = params.equation;
  if (eq == Equation::gpe_full) throw Error(ErrorKind::invalid_argument, "solve_envelope: gpe_full is not an envelope");
  const GridSpec& grid = a0.grid;
  if (!(phase.grid() == grid)) throw Error(ErrorKind::grid_mismatch, "solve_envelope: phase grid differs");
  check_basis(grid, basis);
  if (has_dispersion(eq) && !(params.alpha > 0.0)) {
    throw Error(ErrorKind::nonpositive_input, std::string(to_string(eq)) + " requires alpha > 0");
  }
  if (is_oscillatory(eq) && !(params.epsilon > 0.0)) {
    throw Error(ErrorKind::nonpositive_input, std::string(to_string(eq)) + " requires epsilon > 0");
  }
  check_dt(params, dt_cap(eq, params.epsilon, params.alpha, grid, max_grad_s));

  const int steps = step_count(params.t_final, params.dt);
  const double dt = params.t_final / steps;
  const double alpha = has_dispersion(eq) ? params.alpha : 0.0;
  const double inv_eps2 = is_oscillatory(eq) ? 1.0 / (params.epsilon * params.epsilon) : 0.0;
  const Complex strength = -kI * params.nonlinear_strength;
  SpectralX spec(grid, basis.mode_count());

  std::vector<Eigen::MatrixXcd> grad;
  Eigen::MatrixXcd lap;
  auto rhs = [&](double t, const Eigen::MatrixXcd& a) {
    const PhaseField& ph = phase.at(t);
    spec.gradient_laplacian(a, grad, lap);
    Eigen::MatrixXcd out(a.rows(), a.cols());
    const Eigen::Map<const Eigen::VectorXd> lap_s(ph.lap_s.data(), static_cast<Eigen::Index>(ph.lap_s.size()));
    out.noalias() = a * (-0.5 * lap_s).asDiagonal();
    for (int axis = 0; axis < grid.dim_n; ++axis) {
      out.noalias() -= grad[axis] * ph.grad_s.row(axis).transpose().asDiagonal();
    }
    if (alpha > 0.0) out += Complex(0.0, 0.5 * alpha) * lap;
    if (params.nonlinear_strength != 0.0) {
      if (is_oscillatory(eq)) {
        out += strength * filtered_cubic(t * inv_eps2, a, basis);
      } else {
        out += strength * averaged_cubic(a, basis);
      }
    }
    return out;
  };

  Trajectory traj;
  traj.steps = steps;
  traj.dt = dt;
  Field state = a0;
  state.time = 0.0;
  check_record(state, basis);
  traj.records.push_back(state);
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const Eigen::MatrixXcd& y = state.data;
    const Eigen::MatrixXcd k1 = rhs(t, y);
    const Eigen::MatrixXcd k2 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k1);
    const Eigen::MatrixXcd k3 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k2);
    const Eigen::MatrixXcd k4 = rhs(t + dt, y + dt * k3);
    state.data += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    state.time = (s + 1) * dt;
    if ((s + 1) % params.record_every == 0 || s + 1 == steps) {
      check_record(state, basis);
      traj.records.push_back(state);
    }
  }
  traj.records.back().time = params.t_final;
  return traj;
}

Field to_envelope(const Field& psi, const PhaseField& phase, double epsilon, double alpha, const HermiteBasis& basis) {
  if (std::abs(psi.time - phase.time) > 1e-12 * std::max(1.0, std::abs(psi.time))) {
    throw Error(ErrorKind::time_mismatch, "to_envelope: field and phase at different times");
  }
  if (!(alpha > 0.0) || !(epsilon > 0.0)) {
    throw Error(ErrorKind::nonpositive_input, "to_envelope: epsilon and alpha must be positive");
  }
  Field a = psi;
  for (Eigen::Index p = 0; p < a.data.cols(); ++p) a.data.col(p) *= std::polar(1.0, -phase.s_values[p] / alpha);
  propagate_in_place(-psi.time / (epsilon * epsilon), a.data, basis);
  return a;
}

Field from_envelope(const Field& a, const PhaseField& phase, double epsilon, double alpha, const HermiteBasis& basis) {
  if (std::abs(a.time - phase.time) > 1e-12 * std::max(1.0, std::abs(a.time))) {
    throw Error(ErrorKind::time_mismatch, "from_envelope: field and phase at different times");
  }
  if (!(alpha > 0.0) || !(epsilon > 0.0)) {
    throw Error(ErrorKind::nonpositive_input, "from_envelope: epsilon and alpha must be positive");
  }
  Field psi = a;
  propagate_in_place(a.time / (epsilon * epsilon), psi.data, basis);
  for (Eigen::Index p = 0; p < psi.data.cols(); ++p) psi.data.col(p) *= std::polar(1.0, phase.s_values[p] / alpha);
  return psi;
}

// ---------------------------------------------------------------------------
// Rays.

RaySolution solve_rays(const Field& a0, const SolverParams& params, const InitialPhase& s0,
                       const HermiteBasis& basis, const EikonalOptions& options) {
  const Equation eq = params.equation;
  if (eq != Equation::env_limit && eq != Equation::env_oscillatory) {
    throw Error(ErrorKind::invalid_argument, "solve_rays handles only the alpha = 0 equations");
  }
  if (eq == Equation::env_oscillatory && !(params.epsilon > 0.0)) {
    throw Error(ErrorKind::nonpositive_input, "solve_rays: env_oscillatory requires epsilon > 0");
  }
  if (!(params.dt > 0.0) || !(params.t_final >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "solve_rays: dt must be positive and t_final nonnegative");
  }
  const GridSpec& grid = a0.grid;
  check_basis(grid, basis);
  if (params.t_final == 0.0) {
    RaySolution sol;
    for (int p = 0; p < grid.num_points(); ++p) sol.launch.push_back(grid.position(p));
    sol.endpoints = sol.launch;
    sol.amplitudes = a0.data;
    return sol;
  }

  // launch points by continuation in time from y = x
  PhaseField phase;
  const int legs = 8;
  for (int k = 1; k <= legs; ++k) {
    phase = phase_on_grid(params.t_final * k / legs, grid, s0, options, k == 1 ? nullptr : &phase);
  }

  RaySolution sol;
  sol.time = params.t_final;
  sol.launch = phase.launch;
  sol.endpoints.reserve(sol.launch.size());
  for (const auto& y : sol.launch) sol.endpoints.push_back(hamilton_flow(params.t_final, y, s0).x);

  const int steps = step_count(params.t_final, params.dt);
  const double dt = params.t_final / steps;
  const double inv_eps2 = eq == Equation::env_oscillatory ? 1.0 / (params.epsilon * params.epsilon) : 0.0;
  const Complex strength = -kI * params.nonlinear_strength;
  const auto rays = static_cast<Eigen::Index>(sol.launch.size());

  auto lap_along = [&](double t) {
    Eigen::VectorXd lap(rays);
    for (Eigen::Index r = 0; r < rays; ++r) {
      const double jac = jacobian(t, sol.launch[r], s0);
      if (std::abs(jac) <= options.jacobian_floor) {
        throw Error(ErrorKind::caustic_reached, "solve_rays: caustic reached at t = " + std::to_string(t));
      }
      lap(r) = laplacian_along_ray(t, sol.launch[r], s0);
    }
    return lap;
  };
  auto rhs = [&](double t, const Eigen::MatrixXcd& a) {
    const Eigen::VectorXd lap = lap_along(t);
    Eigen::MatrixXcd out = a * (-0.5 * lap).asDiagonal();
    if (params.nonlinear_strength != 0.0) {
      if (eq == Equation::env_oscillatory) {
        out += strength * filtered_cubic(t * inv_eps2, a, basis);
      } else {
        out += strength * averaged_cubic(a, basis);
      }
    }
    return out;
  };

  Eigen::MatrixXcd a = interpolate_x(a0, sol.launch);
  // Launch points outside the box would pick up a periodic image; the data
  // there is zero by the boundary-decay invariant.
  for (Eigen::Index r = 0; r < rays; ++r) {
    if ((sol.launch[r].array().abs() > grid.half_width).any()) a.col(r).setZero();
  }
  for (int s = 0; s < steps; ++s) {
    const double t = s * dt;
    const Eigen::MatrixXcd k1 = rhs(t, a);
    const Eigen::MatrixXcd k2 = rhs(t + 0.5 * dt, a + (0.5 * dt) * k1);
    const Eigen::MatrixXcd k3 = rhs(t + 0.5 * dt, a + (0.5 * dt) * k2);
    const Eigen::MatrixXcd k4 = rhs(t + dt, a + dt * k3);
    a += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  sol.amplitudes = std::move(a);
  return sol;
}

Field rays_to_field(const RaySolution& rays, const GridSpec& grid) {
  if (rays.endpoints.size() != static_cast<std::size_t>(grid.num_points())) {
    throw Error(ErrorKind::grid_mismatch, "rays_to_field: ray count differs from the grid size");
  }
  const double tol = 1e-9 * std::max(1.0, grid.half_width);
  for (int p = 0; p < grid.num_points(); ++p) {
    if ((rays.endpoints[p] - grid.position(p)).norm() > tol) {
      throw Error(ErrorKind::grid_mismatch, "rays_to_field: ray endpoints are not on the grid");
    }
  }
  Field f = Field::zeros(grid, rays.time);
  f.data = rays.amplitudes;
  return f;
}

}  // namespace condred
