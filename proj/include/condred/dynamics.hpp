#pragma once

// Time integrators for the rescaled GPE and its envelope reformulations.
//
// GPE (divided by alpha):
//   i d_t Psi = H_z Psi / eps^2 - (alpha/2) Lap_x Psi + |x|^2/(2 alpha) Psi + |Psi|^2 Psi
// Envelope equations, all of the form
//   d_t A + grad S . grad A + (Lap S / 2) A = i (alpha/2) Lap_x A - i N(t, A)
// with N = F(t/eps^2, .) (env_full, env_oscillatory) or F_av (env_averaged,
// env_limit), and alpha = 0 for env_oscillatory and env_limit.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "condred/eikonal.hpp"
#include "condred/field_space.hpp"

namespace condred {

enum class Equation { gpe_full, env_full, env_averaged, env_oscillatory, env_limit };

std::string_view to_string(Equation eq);
std::optional<Equation> equation_from_string(std::string_view name);

/// True for the equations that carry the fast phase t/eps^2.
bool is_oscillatory(Equation eq);
/// True for the equations that carry the i (alpha/2) Lap_x term.
bool has_dispersion(Equation eq);

struct SolverParams {
  double epsilon = 1.0;
  double alpha = 0.0;
  double t_final = 0.5;
  double dt = 0.0;
  Equation equation = Equation::env_limit;
  int record_every = 1;
  double nonlinear_strength = 1.0;  // 0 switches the cubic term off
};

/// beta = eps^d alpha^{-n/2}.
double scaling_beta(double epsilon, double alpha, int n, int d);
/// alpha = eps^{2d/n} beta^{-2/n}.
double alpha_from_beta(double epsilon, double beta, int n, int d);

/// Largest admissible step: min of eps^2/20 (fast phase), 2.5/(alpha xi_max^2/2)
/// (RK4 on the dispersive term) and dx/(2 max|grad S|) (advection), each
/// where it applies.
double dt_cap(Equation eq, double epsilon, double alpha, const GridSpec& grid, double max_grad_s);

/// max over [0, t_final] and the grid of |grad S|, sampled at 17 times.
double max_phase_speed(const GridSpec& grid, const InitialPhase& s0, double t_final,
                       const EikonalOptions& options = {});

struct Trajectory {
  std::vector<Field> records;  // t = 0, every record_every steps, and t_final
  int steps = 0;
  double dt = 0.0;

  const Field& final_state() const { return records.back(); }
};

/// Number of steps of size <= dt that land exactly on t_final.
int step_count(double t_final, double dt);
/// Largest step <= target that splits t_final into a multiple of `records` steps.
double aligned_dt(double t_final, double target, int records);

Trajectory solve_gpe(const Field& psi0, const SolverParams& params, const HermiteBasis& basis);

Trajectory solve_envelope(const Field& a0, const SolverParams& params, PhaseProvider& phase,
                          const HermiteBasis& basis, double max_grad_s);
/// Convenience overload computing max |grad S| itself.
Trajectory solve_envelope(const Field& a0, const SolverParams& params, PhaseProvider& phase,
                          const HermiteBasis& basis);

/// A = e^{i t H_z / eps^2} e^{-i S / alpha} Psi.
Field to_envelope(const Field& psi, const PhaseField& phase, double epsilon, double alpha, const HermiteBasis& basis);
/// Psi = e^{i S / alpha} e^{-i t H_z / eps^2} A.
Field from_envelope(const Field& a, const PhaseField& phase, double epsilon, double alpha, const HermiteBasis& basis);

struct RaySolution {
  double time = 0.0;
  std::vector<Point> launch;     // y
  std::vector<Point> endpoints;  // x(time, y), the grid points
  Eigen::MatrixXcd amplitudes;   // mode_count x rays
};

/// Lagrangian solve of the alpha = 0 equations: rays are launched from
/// y(t_final, x_j) for every grid point x_j, so endpoints land on the grid.
/// Initial amplitudes come from trigonometric interpolation of a0.
RaySolution solve_rays(const Field& a0, const SolverParams& params, const InitialPhase& s0,
                       const HermiteBasis& basis, const EikonalOptions& options = {});

/// Ray amplitudes as a field on the grid the rays end on.
Field rays_to_field(const RaySolution& rays, const GridSpec& grid);

}  // namespace condred
