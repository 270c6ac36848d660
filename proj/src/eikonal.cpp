#include "condred/eikonal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "condred/error.hpp"

namespace condred {

InitialPhase InitialPhase::zero() { return {}; }

InitialPhase InitialPhase::linear(double b) {
  InitialPhase s;
  s.kind = Kind::linear;
  s.slope = b;
  return s;
}

InitialPhase InitialPhase::quadratic(double c) {
  InitialPhase s;
  s.kind = Kind::quadratic;
  s.curvature = c;
  return s;
}

InitialPhase InitialPhase::gaussian_bump(double a, double w) {
  if (!(w > 0.0)) throw Error(ErrorKind::invalid_argument, "gaussian_bump width must be positive");
  InitialPhase s;
  s.kind = Kind::gaussian_bump;
  s.amplitude = a;
  s.width = w;
  return s;
}

double InitialPhase::value(const Point& x) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::linear: return slope * x(0);
    case Kind::quadratic: return 0.5 * curvature * x.squaredNorm();
    case Kind::gaussian_bump: return amplitude * std::exp(-0.5 * x.squaredNorm() / (width * width));
  }
  return 0.0;
}

Point InitialPhase::gradient(const Point& x) const {
  Point g = Point::Zero(x.size());
  switch (kind) {
    case Kind::zero: break;
    case Kind::linear: g(0) = slope; break;
    case Kind::quadratic: g = curvature * x; break;
    case Kind::gaussian_bump: {
      const double w2 = width * width;
      g = -amplitude / w2 * std::exp(-0.5 * x.squaredNorm() / w2) * x;
      break;
    }
  }
  return g;
}

SmallMatrix InitialPhase::hessian(const Point& x) const {
  const auto n = x.size();
  SmallMatrix h = SmallMatrix::Zero(n, n);
  switch (kind) {
    case Kind::zero:
    case Kind::linear: break;
    case Kind::quadratic: h = curvature * SmallMatrix::Identity(n, n); break;
    case Kind::gaussian_bump: {
      const double w2 = width * width;
      const double e = amplitude * std::exp(-0.5 * x.squaredNorm() / w2);
      h = e * (x * x.transpose() / (w2 * w2) - SmallMatrix::Identity(n, n) / w2);
      break;
    }
  }
  return h;
}

std::string InitialPhase::name() const {
  switch (kind) {
    case Kind::zero: return "zero";
    case Kind::linear: return "linear";
    case Kind::quadratic: return "quadratic";
    case Kind::gaussian_bump: return "gaussian_bump";
  }
  return "unknown";
}

RayState hamilton_flow(double t, const Point& y, const InitialPhase& s0) {
  const double c = std::cos(t), s = std::sin(t);
  const Point g = s0.gradient(y);
  return {y * c + g * s, -y * s + g * c};
}

SmallMatrix ray_jacobian_x(double t, const Point& y, const InitialPhase& s0) {
  const auto n = y.size();
  return SmallMatrix::Identity(n, n) * std::cos(t) + s0.hessian(y) * std::sin(t);
}

SmallMatrix ray_jacobian_xi(double t, const Point& y, const InitialPhase& s0) {
  const auto n = y.size();
  return -SmallMatrix::Identity(n, n) * std::sin(t) + s0.hessian(y) * std::cos(t);
}

double jacobian(double t, const Point& y, const InitialPhase& s0) { return ray_jacobian_x(t, y, s0).determinant(); }

double laplacian_along_ray(double t, const Point& y, const InitialPhase& s0) {
  const SmallMatrix dx = ray_jacobian_x(t, y, s0);
  const SmallMatrix dxi = ray_jacobian_xi(t, y, s0);
  if (dx.rows() == 1) return dxi(0, 0) / dx(0, 0);
  // trace(A B^{-1}) for 2x2 via the adjugate
  const double det = dx.determinant();
  SmallMatrix adj(2, 2);
  adj << dx(1, 1), -dx(0, 1), -dx(1, 0), dx(0, 0);
  return (dxi * adj).trace() / det;
}

double action_along_ray(double t, const Point& y, const InitialPhase& s0, int steps) {
  if (steps < 1) throw Error(ErrorKind::invalid_argument, "action_along_ray: steps must be >= 1");
  auto rate = [&](double tau) {
    const RayState r = hamilton_flow(tau, y, s0);
    return 0.5 * (r.xi.squaredNorm() - r.x.squaredNorm());
  };
  const double h = t / steps;
  double z = s0.value(y);
  for (int k = 0; k < steps; ++k) {
    const double tau = k * h;
    const double k1 = rate(tau);
    const double k2 = rate(tau + 0.5 * h);
    const double k3 = k2;  // the integrand does not depend on z
    const double k4 = rate(tau + h);
    z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return z;
}

double action_exact(double t, const Point& y, const InitialPhase& s0) {
  const Point g = s0.gradient(y);
  const double spread = g.squaredNorm() - y.squaredNorm();
  const double cross = y.dot(g);
  return s0.value(y) + 0.25 * spread * std::sin(2.0 * t) + 0.5 * cross * (std::cos(2.0 * t) - 1.0);
}

Point invert_ray_map(double t, const Point& x, const InitialPhase& s0, const Point& guess, double tol,
                     const EikonalOptions& options) {
  Point y = guess;
  Point residual = hamilton_flow(t, y, s0).x - x;
  double res_norm = residual.norm();
  for (int it = 0; it < options.max_iterations; ++it) {
    const SmallMatrix jac = ray_jacobian_x(t, y, s0);
    const double det = jac.determinant();
    if (std::abs(det) < options.jacobian_floor) {
      throw Error(ErrorKind::singular_jacobian, "invert_ray_map: |J| = " + std::to_string(std::abs(det)) +
                                                    " below the floor at t = " + std::to_string(t));
    }
    if (res_norm < tol) return y;
    const Point step = jac.partialPivLu().solve(residual);
    // backtracking keeps the iteration monotone far from the solution
    double lambda = 1.0;
    Point trial;
    Point trial_res;
    double trial_norm = 0.0;
    for (int k = 0; k < 30; ++k) {
      trial = y - lambda * step;
      trial_res = hamilton_flow(t, trial, s0).x - x;
      trial_norm = trial_res.norm();
      if (trial_norm < res_norm || trial_norm < tol) break;
      lambda *= 0.5;
    }
    y = trial;
    residual = trial_res;
    res_norm = trial_norm;
  }
  if (res_norm < tol) return y;
  throw Error(ErrorKind::no_convergence, "invert_ray_map: Newton did not converge (residual " +
                                             std::to_string(res_norm) + ") at t = " + std::to_string(t));
}

PhaseField phase_on_grid(double t, const GridSpec& grid, const InitialPhase& s0, const EikonalOptions& options,
                         const PhaseField* previous) {
  const int points = grid.num_points();
  const bool warm = previous != nullptr && previous->launch.size() == static_cast<std::size_t>(points);
  PhaseField out;
  out.time = t;
  out.s_values.resize(points);
  out.grad_s.resize(grid.dim_n, points);
  out.lap_s.resize(points);
  out.launch.resize(points);
  out.min_jacobian = std::numeric_limits<double>::infinity();
  for (int p = 0; p < points; ++p) {
    const Point x = grid.position(p);
    if (t == 0.0) {
      out.launch[p] = x;
      out.s_values[p] = s0.value(x);
      out.grad_s.col(p) = s0.gradient(x);
      out.lap_s[p] = s0.hessian(x).trace();
      out.min_jacobian = 1.0;
      continue;
    }
    // Newton tolerance relative to the coordinate size keeps it attainable
    const double tol = options.newton_tol * std::max(1.0, x.norm());
    Point y;
    try {
      y = invert_ray_map(t, x, s0, warm ? previous->launch[p] : x, tol, options);
    } catch (const Error& e) {
      throw Error(ErrorKind::caustic_reached, "caustic reached at t = " + std::to_string(t) + ": " + e.what());
    }
    out.launch[p] = y;
    out.s_values[p] = action_exact(t, y, s0);
    out.grad_s.col(p) = hamilton_flow(t, y, s0).xi;
    out.lap_s[p] = laplacian_along_ray(t, y, s0);
    out.min_jacobian = std::min(out.min_jacobian, std::abs(jacobian(t, y, s0)));
  }
  out.caustic_flag = !(out.min_jacobian > options.jacobian_floor);
  if (out.caustic_flag) {
    throw Error(ErrorKind::caustic_reached, "caustic reached at t = " + std::to_string(t));
  }
  return out;
}

double caustic_time(const InitialPhase& s0, const GridSpec& grid, double jacobian_floor) {
  if (!(jacobian_floor > 0.0 && jacobian_floor < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "caustic_time: jacobian_floor must lie in (0, 1)");
  }
  std::vector<Point> samples;
  samples.reserve(static_cast<std::size_t>(grid.num_points()));
  for (int p = 0; p < grid.num_points(); ++p) samples.push_back(grid.position(p));
  auto hit = [&](double t) {
    for (const auto& y : samples)
      if (std::abs(jacobian(t, y, s0)) <= jacobian_floor) return true;
    return false;
  };
  const int scan = 4096;
  const double h = std::numbers::pi / scan;
  double lo = 0.0;
  for (int k = 1; k <= scan; ++k) {
    const double hi = k * h;
    if (hit(hi)) {
      double a = lo, b = hi;
      while (b - a > 1e-12) {
        const double mid = 0.5 * (a + b);
        (hit(mid) ? b : a) = mid;
      }
      return b;
    }
    lo = hi;
  }
  return kNoCaustic;
}

double growth_constant(const PhaseField& phase, const GridSpec& grid) {
  double c = 0.0;
  for (int p = 0; p < grid.num_points(); ++p) {
    c = std::max(c, phase.grad_s.col(p).norm() / (1.0 + grid.position(p).norm()));
  }
  return c;
}

PhaseProvider::PhaseProvider(GridSpec grid, InitialPhase s0, EikonalOptions options)
    : grid_(std::move(grid)), s0_(s0), options_(options) {}

const PhaseField& PhaseProvider::at(double t) {
  if (has_current_ && current_.time == t) return current_;
  current_ = phase_on_grid(t, grid_, s0_, options_, has_current_ ? &current_ : nullptr);
  has_current_ = true;
  return current_;
}

void write_phase_csv(const PhaseField& phase, const GridSpec& grid, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io_failure, "cannot write " + path);
  out << (grid.dim_n == 1 ? "x,s,grad_s,lap_s\n" : "x,y,s,grad_s_x,grad_s_y,lap_s\n");
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
    out << buf;
  };
  for (int p = 0; p < grid.num_points(); ++p) {
    const Point x = grid.position(p);
    for (int a = 0; a < grid.dim_n; ++a) put(x(a), ',');
    put(phase.s_values[p], ',');
    for (int a = 0; a < grid.dim_n; ++a) put(phase.grad_s(a, p), ',');
    put(phase.lap_s[p], '\n');
  }
  if (!out) throw Error(ErrorKind::io_failure, "write failed for " + path);
}

}  // namespace condred
