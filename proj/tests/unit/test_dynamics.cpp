#include <cmath>
#include <numbers>
#include <vector>

#include "condred/dynamics.hpp"
#include "condred/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace condred;
using doctest::Approx;

namespace {

const double kGamma0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);

GridSpec small_grid(int modes = 4) {
  GridSpec g;
  g.nx = 128;
  g.half_width = 10.0;
  g.num_modes = modes;
  g.num_quad = 3 * modes;
  return g;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::invalid_argument;
}

double off_mode_mass(const Field& f) {
  return f.grid.cell_volume() * f.data.bottomRows(f.data.rows() - 1).squaredNorm();
}

SolverParams params_for(Equation eq, double eps, double alpha, double t_final, double dt) {
  SolverParams p;
  p.equation = eq;
  p.epsilon = eps;
  p.alpha = alpha;
  p.t_final = t_final;
  p.dt = dt;
  p.record_every = step_count(t_final, dt);
  return p;
}

}  // namespace

TEST_CASE("scaling_beta") {
  CHECK(scaling_beta(0.1, 0.01, 1, 1) == Approx(1.0).epsilon(1e-14));
  CHECK(scaling_beta(1.0, 1.0, 1, 1) == 1.0);
  for (auto [eps, alpha, n, d] : {std::tuple{0.3, 0.2, 1, 1}, std::tuple{0.5, 0.7, 2, 1}, std::tuple{0.8, 0.1, 1, 2}}) {
    const double beta = scaling_beta(eps, alpha, n, d);
    CHECK(alpha_from_beta(eps, beta, n, d) == Approx(alpha).epsilon(1e-14));
  }
  CHECK(kind_of([] { (void)scaling_beta(0.0, 0.1, 1, 1); }) == ErrorKind::nonpositive_input);
  CHECK(kind_of([] { (void)scaling_beta(0.1, -1.0, 1, 1); }) == ErrorKind::nonpositive_input);
  CHECK(kind_of([] { (void)alpha_from_beta(0.1, 0.0, 1, 1); }) == ErrorKind::nonpositive_input);
}

TEST_CASE("equation names and classes") {
  for (auto eq : {Equation::gpe_full, Equation::env_full, Equation::env_averaged, Equation::env_oscillatory,
                  Equation::env_limit}) {
    CHECK(equation_from_string(to_string(eq)) == eq);
  }
  CHECK_FALSE(equation_from_string("gpe"));
  CHECK(is_oscillatory(Equation::env_oscillatory));
  CHECK_FALSE(is_oscillatory(Equation::env_averaged));
  CHECK(has_dispersion(Equation::env_averaged));
  CHECK_FALSE(has_dispersion(Equation::env_limit));
}

TEST_CASE("time step caps and alignment") {
  const GridSpec g;  // dx = 3/32, xi_max = 32 pi / 3
  const double xi_max = std::numbers::pi / g.dx();
  CHECK(dt_cap(Equation::gpe_full, 0.5, 0.2, g, 3.0) == Approx(0.25 / 20));
  CHECK(dt_cap(Equation::env_limit, 0.5, 0.0, g, 0.0) == std::numeric_limits<double>::infinity());
  CHECK(dt_cap(Equation::env_limit, 0.5, 0.2, g, 3.0) == Approx(g.dx() / 6.0));
  CHECK(dt_cap(Equation::env_averaged, 0.5, 0.2, g, 0.0) == Approx(2.5 / (0.1 * xi_max * xi_max)));
  CHECK(dt_cap(Equation::env_full, 0.1, 0.2, g, 3.0) == Approx(0.01 / 20));
  CHECK(dt_cap(Equation::env_oscillatory, 0.5, 0.2, g, 1.0) == Approx(std::min(0.0125, g.dx() / 2)));

  CHECK(step_count(0.5, 0.1) == 5);
  CHECK(step_count(0.5, 0.3) == 2);
  CHECK(aligned_dt(0.5, 0.03, 4) == Approx(0.5 / 20));
  CHECK(aligned_dt(0.5, 0.01, 20) == Approx(0.5 / 60));
  CHECK(aligned_dt(0.5, 0.0125, 20) == Approx(0.0125));
  CHECK(kind_of([] { (void)aligned_dt(0.5, 0.01, 0); }) == ErrorKind::invalid_argument);
}

TEST_CASE("linear GPE matches the harmonic oscillator eigen-expansion") {
  // -(alpha/2) d_x^2 + x^2/(2 alpha) = (1/2)(-d_y^2 + y^2) with y = x / sqrt(alpha)
  const GridSpec g = small_grid(2);
  const HermiteBasis b = build_basis(g);
  const double alpha = 0.5, t_final = 0.5;
  Field psi0 = Field::zeros(g);
  for (int p = 0; p < g.nx; ++p) {
    const double x = g.coordinate(p);
    psi0.data(0, p) = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * (x - 0.5) * (x - 0.5)) *
                      std::polar(1.0, 0.3 * x);
  }
  const int terms = 60;
  const double scale = std::pow(alpha, -0.25);
  auto eigenfunction = [&](int n, double x) {
    return scale * static_cast<double>(oracle::hermite_function(n, x / std::sqrt(alpha)));
  };
  std::vector<Complex> coeff(terms);
  for (int n = 0; n < terms; ++n) {
    Complex s = 0.0;
    for (int p = 0; p < g.nx; ++p) s += psi0.data(0, p) * eigenfunction(n, g.coordinate(p));
    coeff[n] = s * g.dx();
  }

  SolverParams prm = params_for(Equation::gpe_full, 0.5, alpha, t_final, 1e-3);
  prm.nonlinear_strength = 0.0;
  const Field psi = solve_gpe(psi0, prm, b).final_state();
  double worst = 0.0;
  for (int p = 0; p < g.nx; ++p) {
    Complex exact = 0.0;
    for (int n = 0; n < terms; ++n) {
      exact += coeff[n] * std::polar(1.0, -(n + 0.5) * t_final) * eigenfunction(n, g.coordinate(p));
    }
    worst = std::max(worst, std::abs(psi.data(0, p) - exact));
    CHECK(std::abs(psi.data(1, p)) < 1e-15);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("GPE conserves mass and converges at second order") {
  const GridSpec g = small_grid(32);
  const HermiteBasis b = build_basis(g);
  const Field psi0 = sample_initial(InitialAmplitude::two_mode(0.8, 0.6), g, b);
  const double m0 = mass_coefficients(psi0);
  std::vector<Field> finals;
  for (double dt : {0.01, 0.005, 0.0025}) {
    SolverParams prm = params_for(Equation::gpe_full, 0.5, 0.3, 0.3, dt);
    prm.record_every = 1;
    const Trajectory tr = solve_gpe(psi0, prm, b);
    for (const auto& f : tr.records) CHECK(std::abs(mass_coefficients(f) - m0) <= 1e-10);
    finals.push_back(tr.final_state());
  }
  const double d1 = l2_norm(finals[0] - finals[1]);
  const double d2 = l2_norm(finals[1] - finals[2]);
  CHECK(d1 / d2 == Approx(4.0).epsilon(0.1));
}

TEST_CASE("GPE argument checks") {
  const GridSpec g = small_grid();
  const HermiteBasis b = build_basis(g);
  const Field psi0 = sample_initial(InitialAmplitude::polarized_gaussian(), g, b);
  CHECK(kind_of([&] { (void)solve_gpe(psi0, params_for(Equation::gpe_full, 0.5, 0.2, 0.1, 0.02), b); }) ==
        ErrorKind::dt_cap);
  CHECK(kind_of([&] { (void)solve_gpe(psi0, params_for(Equation::env_full, 0.5, 0.2, 0.1, 0.01), b); }) ==
        ErrorKind::invalid_argument);
  CHECK(kind_of([&] { (void)solve_gpe(psi0, params_for(Equation::gpe_full, 0.5, 0.0, 0.1, 0.01), b); }) ==
        ErrorKind::nonpositive_input);
  CHECK(kind_of([&] { (void)solve_gpe(psi0, params_for(Equation::gpe_full, 0.5, 0.2, 0.1, 0.0), b); }) ==
        ErrorKind::invalid_argument);
}

TEST_CASE("env_limit with polarized data follows the closed-form ray law") {
  // S = -x^2 tan t / 2, y = x / cos t, and along each ray
  // a = a0(y) / sqrt(cos t) exp(-i gamma |a0(y)|^2 ln(sec t + tan t))
  const GridSpec g = small_grid();
  const HermiteBasis b = build_basis(g);
  const auto amp = InitialAmplitude::polarized_gaussian();
  const Field a0 = sample_initial(amp, g, b);
  const double t_final = 0.5;
  PhaseProvider phase(g, InitialPhase::zero());
  const double speed = max_phase_speed(g, InitialPhase::zero(), t_final);
  SolverParams prm = params_for(Equation::env_limit, 1.0, 0.0, t_final,
                                aligned_dt(t_final, dt_cap(Equation::env_limit, 1.0, 0.0, g, speed), 5));
  prm.record_every = step_count(t_final, prm.dt) / 5;
  const Trajectory tr = solve_envelope(a0, prm, phase, b, speed);
  CHECK(tr.records.size() == 6);
  for (const auto& f : tr.records) {
    const double t = f.time;
    const double c = std::cos(t);
    double worst = 0.0;
    for (int p = 0; p < g.nx; ++p) {
      const double a0y = amp.profile(Point::Constant(1, g.coordinate(p) / c));
      const Complex exact = a0y / std::sqrt(c) * std::polar(1.0, -kGamma0 * a0y * a0y * std::log(1.0 / c + std::tan(t)));
      worst = std::max(worst, std::abs(f.data(0, p) - exact));
    }
    CHECK(worst < 1e-6);
    CHECK(off_mode_mass(f) <= 1e-10);
  }
}

TEST_CASE("env_averaged keeps polarized data polarized") {
  const GridSpec g = small_grid(6);
  const HermiteBasis b = build_basis(g);
  const Field a0 = sample_initial(InitialAmplitude::polarized_gaussian(0.3), g, b);
  PhaseProvider phase(g, InitialPhase::linear(0.5));
  SolverParams prm = params_for(Equation::env_averaged, 1.0, 0.2, 0.3, 0.01);
  prm.record_every = 5;
  const Trajectory tr = solve_envelope(a0, prm, phase, b);
  for (const auto& f : tr.records) CHECK(off_mode_mass(f) <= 1e-10);
}

TEST_CASE("linear transport conserves |A|^2 J along rays") {
  const GridSpec g = small_grid();
  const HermiteBasis b = build_basis(g);
  const auto amp = InitialAmplitude::two_mode(0.8, 0.6, 0.2);
  const Field a0 = sample_initial(amp, g, b);
  const auto s0 = InitialPhase::quadratic(-0.5);
  const double t_final = 0.4;
  PhaseProvider phase(g, s0);
  SolverParams prm = params_for(Equation::env_limit, 1.0, 0.0, t_final, 0.004);
  prm.nonlinear_strength = 0.0;
  const Field a = solve_envelope(a0, prm, phase, b).final_state();
  const PhaseField ph = phase_on_grid(t_final, g, s0);
  const HermiteBasis& basis = b;
  double worst = 0.0;
  for (int p = 0; p < g.nx; ++p) {
    const Point& y = ph.launch[p];
    const double j = jacobian(t_final, y, s0);
    double initial = 0.0;
    for (int k = 0; k < basis.mode_count(); ++k) initial += std::norm(amp.coefficient(y, k, basis));
    worst = std::max(worst, std::abs(a.data.col(p).squaredNorm() * j - initial));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("env_full agrees with the transformed GPE") {
  const GridSpec g = small_grid(32);
  const HermiteBasis b = build_basis(g);
  const double eps = 0.5, alpha = 0.2, t_final = 0.2;
  const auto s0 = InitialPhase::zero();
  const Field a0 = sample_initial(InitialAmplitude::two_mode(0.8, 0.6), g, b);
  const double dt = aligned_dt(t_final, 0.0025, 1);
  const Field psi_t = solve_gpe(a0, params_for(Equation::gpe_full, eps, alpha, t_final, dt), b).final_state();
  PhaseProvider phase(g, s0);
  const Field env = solve_envelope(a0, params_for(Equation::env_full, eps, alpha, t_final, dt), phase, b).final_state();
  const Field from_gpe = to_envelope(psi_t, phase_on_grid(t_final, g, s0), eps, alpha, b);
  CHECK(bm_error(env, from_gpe, 2, b) <= 1e-3 * bm_norm(env, 2, b));
}

TEST_CASE("change of unknown") {
  const GridSpec g = small_grid(6);
  const HermiteBasis b = build_basis(g);
  const double eps = 0.4, alpha = 0.3;
  const auto s0 = InitialPhase::gaussian_bump(0.5, 1.0);
  const Field a0 = sample_initial(InitialAmplitude::two_mode(0.8, 0.6), g, b);

  // WKB data at t = 0
  const PhaseField ph0 = phase_on_grid(0.0, g, s0);
  Field psi0 = a0;
  for (int p = 0; p < g.nx; ++p) psi0.data.col(p) *= std::polar(1.0, s0.value(g.position(p)) / alpha);
  CHECK(oracle::max_abs_diff(to_envelope(psi0, ph0, eps, alpha, b).data, a0.data) < 1e-15);

  Field psi = oracle::random_field(g, 3);
  psi.time = 0.35;
  const PhaseField ph = phase_on_grid(psi.time, g, s0);
  const Field back = from_envelope(to_envelope(psi, ph, eps, alpha, b), ph, eps, alpha, b);
  CHECK(oracle::max_abs_diff(back.data, psi.data) < 1e-13);

  // at t = 2 pi eps^2 the transversal propagator is the identity
  psi.time = 2 * std::numbers::pi * eps * eps;
  const PhaseField ph2 = phase_on_grid(psi.time, g, s0);
  const Field a = to_envelope(psi, ph2, eps, alpha, b);
  CHECK((a.data.cwiseAbs() - psi.data.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-13);
  for (int p = 0; p < g.nx; ++p) {
    const Eigen::VectorXcd expect = psi.data.col(p) * std::polar(1.0, -ph2.s_values[p] / alpha);
    CHECK((a.data.col(p) - expect).norm() < 1e-12);
  }

  CHECK(kind_of([&] { (void)to_envelope(psi, ph, eps, alpha, b); }) == ErrorKind::time_mismatch);
  CHECK(kind_of([&] { (void)from_envelope(psi, ph, eps, alpha, b); }) == ErrorKind::time_mismatch);
}

TEST_CASE("rays without nonlinearity follow the amplitude law") {
  const GridSpec g = small_grid();
  const HermiteBasis b = build_basis(g);
  const auto amp = InitialAmplitude::two_mode(0.8, 0.6, -0.3);
  const Field a0 = sample_initial(amp, g, b);
  const auto s0 = InitialPhase::quadratic(-0.5);
  SolverParams prm = params_for(Equation::env_limit, 1.0, 0.0, 0.4, 0.002);
  prm.nonlinear_strength = 0.0;
  const RaySolution rays = solve_rays(a0, prm, s0, b);
  REQUIRE(rays.launch.size() == static_cast<std::size_t>(g.nx));
  for (int r = 0; r < g.nx; ++r) {
    const Point& y = rays.launch[r];
    CHECK(std::abs(rays.endpoints[r](0) - g.coordinate(r)) < 1e-11);
    const double j = std::cos(0.4) - 0.5 * std::sin(0.4);
    for (int k = 0; k < b.mode_count(); ++k) {
      CHECK(std::abs(rays.amplitudes(k, r) - amp.coefficient(y, k, b) / std::sqrt(j)) < 1e-10);
    }
  }

  SolverParams zero = prm;
  zero.t_final = 0.0;
  const RaySolution at0 = solve_rays(a0, zero, s0, b);
  CHECK(oracle::max_abs_diff(at0.amplitudes, a0.data) == 0.0);
  CHECK(oracle::max_abs_diff(rays_to_field(at0, g).data, a0.data) == 0.0);
}

TEST_CASE("rays agree with env_limit on the grid") {
  const GridSpec g = small_grid(6);
  const HermiteBasis b = build_basis(g);
  const Field a0 = sample_initial(InitialAmplitude::two_mode(0.8, 0.6), g, b);
  const auto s0 = InitialPhase::gaussian_bump(0.2, 1.5);
  const double t_final = 0.5;
  PhaseProvider phase(g, s0);
  const Field grid_sol = solve_envelope(a0, params_for(Equation::env_limit, 1.0, 0.0, t_final, 0.005), phase, b)
                             .final_state();
  const Field ray_sol = rays_to_field(solve_rays(a0, params_for(Equation::env_limit, 1.0, 0.0, t_final, 0.005), s0, b), g);
  CHECK(l2_norm(grid_sol - ray_sol) <= 1e-4 * l2_norm(grid_sol));
}

TEST_CASE("solver error paths") {
  const GridSpec g = small_grid();
  const HermiteBasis b = build_basis(g);
  const Field a0 = sample_initial(InitialAmplitude::polarized_gaussian(), g, b);

  // J = cos t - sin t reaches the floor near t = 0.71
  PhaseProvider focusing(g, InitialPhase::quadratic(-1.0));
  CHECK(kind_of([&] {
          (void)solve_envelope(a0, params_for(Equation::env_limit, 1.0, 0.0, 0.8, 0.001), focusing, b);
        }) == ErrorKind::caustic_reached);
  CHECK(kind_of([&] {
          (void)solve_rays(a0, params_for(Equation::env_limit, 1.0, 0.0, 0.8, 0.01), InitialPhase::quadratic(-1.0), b);
        }) == ErrorKind::caustic_reached);

  Field wide = a0;
  wide.data.row(0).setConstant(0.1);
  PhaseProvider flat(g, InitialPhase::zero());
  CHECK(kind_of([&] {
          (void)solve_envelope(wide, params_for(Equation::env_averaged, 1.0, 0.2, 0.1, 0.001), flat, b);
        }) == ErrorKind::boundary_decay);

  CHECK(kind_of([&] {
          (void)solve_envelope(a0, params_for(Equation::env_full, 0.5, 0.2, 0.1, 0.05), flat, b);
        }) == ErrorKind::dt_cap);
  CHECK(kind_of([&] {
          (void)solve_envelope(a0, params_for(Equation::gpe_full, 0.5, 0.2, 0.1, 0.001), flat, b);
        }) == ErrorKind::invalid_argument);
  CHECK(kind_of([&] {
          (void)solve_envelope(a0, params_for(Equation::env_averaged, 0.5, 0.0, 0.1, 0.001), flat, b);
        }) == ErrorKind::nonpositive_input);
  CHECK(kind_of([&] {
          (void)solve_rays(a0, params_for(Equation::env_full, 0.5, 0.2, 0.1, 0.001), InitialPhase::zero(), b);
        }) == ErrorKind::invalid_argument);

  GridSpec other = g;
  other.nx = 64;
  PhaseProvider mismatched(other, InitialPhase::zero());
  CHECK(kind_of([&] {
          (void)solve_envelope(a0, params_for(Equation::env_limit, 1.0, 0.0, 0.1, 0.001), mismatched, b);
        }) == ErrorKind::grid_mismatch);
}
