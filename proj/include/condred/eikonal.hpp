#pragma once

// Eikonal equation d_t S + |grad S|^2/2 + |x|^2/2 = 0 solved by characteristics.
// The harmonic Hamiltonian makes the ray map explicit:
//   x(t, y)  =  y cos t + grad S0(y) sin t
//   xi(t, y) = -y sin t + grad S0(y) cos t
// and S(t, x) = z(t, y(t, x)) with z the action along the ray.

#include <limits>
#include <string>
#include <vector>

#include "condred/field_space.hpp"

namespace condred {

/// Subquadratic initial phase catalog (bounded Hessian on R^n).
struct InitialPhase {
  enum class Kind { zero, linear, quadratic, gaussian_bump };

  Kind kind = Kind::zero;
  double slope = 0.0;      // linear: S0 = slope * x_1
  double curvature = 0.0;  // quadratic: S0 = curvature |x|^2 / 2
  double amplitude = 0.0;  // gaussian_bump: S0 = amplitude exp(-|x|^2 / (2 width^2))
  double width = 1.0;

  static InitialPhase zero();
  static InitialPhase linear(double b);
  static InitialPhase quadratic(double c);
  static InitialPhase gaussian_bump(double a, double w);

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  SmallMatrix hessian(const Point& x) const;
  std::string name() const;
};

struct RayState {
  Point x;
  Point xi;
};

RayState hamilton_flow(double t, const Point& y, const InitialPhase& s0);

/// det(I cos t + Hess S0(y) sin t).
double jacobian(double t, const Point& y, const InitialPhase& s0);

/// Ray derivative matrices grad_y x and grad_y xi.
SmallMatrix ray_jacobian_x(double t, const Point& y, const InitialPhase& s0);
SmallMatrix ray_jacobian_xi(double t, const Point& y, const InitialPhase& s0);

/// Laplacian of S at x(t, y): trace(grad_y xi (grad_y x)^{-1}).
double laplacian_along_ray(double t, const Point& y, const InitialPhase& s0);

/// Action z(t, y) by RK4 on dz/dt = |xi|^2/2 - |x|^2/2 with the given number
/// of steps.
double action_along_ray(double t, const Point& y, const InitialPhase& s0, int steps);

/// Action z(t, y) from the exact time integral of the harmonic ray.
double action_exact(double t, const Point& y, const InitialPhase& s0);

struct EikonalOptions {
  double jacobian_floor = 0.1;
  double newton_tol = 1e-12;
  int max_iterations = 60;
};

/// Newton solve of x(t, y) = x for y.
Point invert_ray_map(double t, const Point& x, const InitialPhase& s0, const Point& guess, double tol,
                     const EikonalOptions& options = {});

struct PhaseField {
  double time = 0.0;
  std::vector<double> s_values;
  Eigen::MatrixXd grad_s;  // dim_n x num_points
  std::vector<double> lap_s;
  double min_jacobian = 1.0;
  bool caustic_flag = false;
  std::vector<Point> launch;  // y(t, x) per grid point
};

/// S, grad S and Lap S on the grid at time t. If `previous` is given (same
/// grid), its launch points seed the Newton iterations.
PhaseField phase_on_grid(double t, const GridSpec& grid, const InitialPhase& s0, const EikonalOptions& options = {},
                         const PhaseField* previous = nullptr);

inline constexpr double kNoCaustic = std::numeric_limits<double>::infinity();

/// First time in (0, pi] where min over grid launch points of |J_t| drops to
/// the floor; kNoCaustic if none.
double caustic_time(const InitialPhase& s0, const GridSpec& grid, double jacobian_floor = 0.1);

/// max |grad S(t, x)| / (1 + |x|) over the grid.
double growth_constant(const PhaseField& phase, const GridSpec& grid);

/// Time-indexed phase provider with Newton continuation between calls and a
/// one-entry cache (RK4 stages repeat times).
class PhaseProvider {
 public:
  PhaseProvider(GridSpec grid, InitialPhase s0, EikonalOptions options = {});

  const PhaseField& at(double t);
  const InitialPhase& initial_phase() const { return s0_; }
  const GridSpec& grid() const { return grid_; }
  const EikonalOptions& options() const { return options_; }

 private:
  GridSpec grid_;
  InitialPhase s0_;
  EikonalOptions options_;
  PhaseField current_;
  bool has_current_ = false;
};

void write_phase_csv(const PhaseField& phase, const GridSpec& grid, const std::string& path);

}  // namespace condred
