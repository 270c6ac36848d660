// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   acceptance [config.toml]
//
// Without an argument the default study configuration is used.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "condred/config.hpp"
#include "condred/convergence_lab.hpp"
#include "condred/dynamics.hpp"
#include "condred/error.hpp"
#include "condred/nonlinearity.hpp"

using namespace condred;

namespace {

const double kGamma0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);

int failures = 0;

void verdict(int id, bool pass, const std::string& what, const std::string& detail) {
  std::printf("criterion %2d: %s  %s  [%s]\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

// Runs `body`; a thrown Error turns into a FAIL line for the criterion.
void criterion(int id, const std::string& what, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail += std::string(detail.empty() ? "" : "; ") + "error: " + e.what();
    pass = false;
  }
  verdict(id, pass, what, detail);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double off_mode_mass(const Field& f) {
  return f.grid.cell_volume() * f.data.bottomRows(f.data.rows() - 1).squaredNorm();
}

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Smooth random field: a few random Hermite coefficients per point under a
// Gaussian x-envelope, with random x-dependent phases.
Field random_field(const GridSpec& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Field f = Field::zeros(g);
  const int active = std::min(g.mode_count(), 6);
  std::vector<Complex> c(active), k(active);
  for (int m = 0; m < active; ++m) {
    c[m] = Complex(u(rng), u(rng));
    k[m] = Complex(2 * u(rng), 0.5 * u(rng));
  }
  for (int p = 0; p < g.num_points(); ++p) {
    const double x = g.position(p).norm();
    const double env = std::exp(-x * x / (2 * 1.5 * 1.5));
    for (int m = 0; m < active; ++m) f.data(m, p) = c[m] * env * std::exp(Complex(0, 1) * (k[m] * x));
  }
  return f;
}

SolverParams params(Equation eq, double eps, double alpha, double t_final, double dt, int record_every) {
  SolverParams p;
  p.equation = eq;
  p.epsilon = eps;
  p.alpha = alpha;
  p.t_final = t_final;
  p.dt = dt;
  p.record_every = record_every;
  return p;
}

struct GpeCheck {
  double gap = 0.0;         // max over records of the relative B^2 difference
  double mass_drift = 0.0;  // max over records
};

// GPE + change of unknown against env_full on one grid.
GpeCheck gpe_vs_env_full(const Scenario& s, const GridSpec& grid, double eps, double alpha, double dt) {
  const HermiteBasis b = build_basis(grid);
  const Field a0 = sample_initial(s.amplitude, grid, b);
  // WKB data psi0 = a0 e^{i S0 / alpha}
  Field psi0 = a0;
  for (int p = 0; p < grid.num_points(); ++p) psi0.data.col(p) *= std::polar(1.0, s.phase.value(grid.position(p)) / alpha);
  const SolverParams gp = params(Equation::gpe_full, eps, alpha, s.t_final, dt, 1);
  const Trajectory psi = solve_gpe(psi0, gp, b);
  PhaseProvider phase(grid, s.phase);
  const Trajectory env = solve_envelope(a0, params(Equation::env_full, eps, alpha, s.t_final, dt, 1), phase, b);

  GpeCheck out;
  const double m0 = mass_coefficients(psi0);
  for (const Field& f : psi.records) out.mass_drift = std::max(out.mass_drift, std::abs(mass_coefficients(f) - m0));
  for (std::size_t r = 0; r < env.records.size(); ++r) {
    const Field& e = env.records[r];
    const Field back = to_envelope(psi.records[r], phase.at(e.time), eps, alpha, b);
    out.gap = std::max(out.gap, bm_error(e, back, 2, b) / bm_norm(e, 2, b));
  }
  return out;
}

double common_dt(const Scenario& s, const GridSpec& grid, double eps, double alpha, int records) {
  const double speed = max_phase_speed(grid, s.phase, s.t_final);
  const double cap = std::min(dt_cap(Equation::gpe_full, eps, alpha, grid, speed),
                              dt_cap(Equation::env_full, eps, alpha, grid, speed));
  return aligned_dt(s.t_final, cap, records);
}

}  // namespace

int main(int argc, char** argv) {
  StudyConfig config;
  try {
    if (argc > 1) config = load_config(argv[1]);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 1;
  }
  const Scenario scenario = scenario_of(config);
  const GridSpec grid = scenario.grid;
  const HermiteBasis basis = build_basis(grid);
  double worst_mass_drift = 0.0;

  // ---- criteria 1-4: the convergence study
  ConvergenceReport report;
  double study_seconds = 0.0;
  bool study_ok = false;
  std::string study_error;
  try {
    const auto start = std::chrono::steady_clock::now();
    report = run_study(scenario, sweep_of(config), resources_of(config));
    study_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    study_ok = !report.incomplete;
    for (const auto& f : report.failures) study_error += f + "; ";
  } catch (const std::exception& e) {
    study_error = e.what();
  }

  // Slope window check: the whole slope +- 2 stderr interval must lie in [lo, hi],
  // and the guard rerun of the pair must move its error by less than 10%.
  auto slope_check = [&](LimitPair pair, double lo, double hi, std::string& d) {
    if (!study_ok) {
      d += std::string(to_string(pair)) + ": study incomplete " + study_error + " ";
      return false;
    }
    const auto it = report.slopes.find(pair);
    if (it == report.slopes.end()) {
      d += std::string(to_string(pair)) + ": no slope ";
      return false;
    }
    const SlopeFit& s = it->second;
    const double a = s.value - 2 * s.std_error, b = s.value + 2 * s.std_error;
    bool ok = a >= lo && b <= hi;
    d += std::string(to_string(pair)) + " slope " + fmt("%.4f", s.value) + " +- " + fmt("%.4f", 2 * s.std_error);
    bool guarded = false;
    for (const auto& g : report.guards) {
      if (g.pair != pair) continue;
      guarded = true;
      ok = ok && g.relative_change < kGuardTolerance;
      d += ", guard change " + fmt("%.2e", g.relative_change);
    }
    if (!guarded && sweep_of(config).guard) {
      ok = false;
      d += ", guard missing";
    }
    d += "; ";
    return ok;
  };

  criterion(1, "averaging rate, eps-sweep at fixed alpha, slope in [1.7, 2.3]", [&](std::string& d) {
    const bool ok = slope_check(LimitPair::eq17, 1.7, 2.3, d);
    d += "study wall time " + fmt("%.1f", study_seconds) + " s (budget 600 s)";
    return ok && study_seconds <= 600.0;
  });
  criterion(2, "averaging rate at alpha = 0, slope in [1.7, 2.3]",
            [&](std::string& d) { return slope_check(LimitPair::eq18, 1.7, 2.3, d); });
  criterion(3, "semiclassical rates, alpha-sweeps at fixed eps, slopes in [0.8, 1.2]", [&](std::string& d) {
    const bool a = slope_check(LimitPair::eq19, 0.8, 1.2, d);
    const bool b = slope_check(LimitPair::eq20, 0.8, 1.2, d);
    return a && b;
  });
  criterion(4, "global bound along alpha = eps^2, slope in [1.7, 2.3]",
            [&](std::string& d) { return slope_check(LimitPair::eq21, 1.7, 2.3, d); });

  // ---- criterion 5: GPE through the change of unknown against env_full
  criterion(5, "GPE vs env_full at (0.5, 0.2): B^2 relative gap <= 1e-3, shrinks >= 3x", [&](std::string& d) {
    const double eps = 0.5, alpha = 0.2;
    const double dt = common_dt(scenario, grid, eps, alpha, config.records);
    GridSpec fine = grid;
    fine.nx *= 2;
    const GpeCheck coarse = gpe_vs_env_full(scenario, grid, eps, alpha, dt);
    const GpeCheck refined = gpe_vs_env_full(scenario, fine, eps, alpha, dt / 2);
    worst_mass_drift = std::max({worst_mass_drift, coarse.mass_drift, refined.mass_drift});
    const double ratio = coarse.gap / refined.gap;
    d = "gap " + fmt("%.3e", coarse.gap) + " at nx " + std::to_string(grid.nx) + ", " + fmt("%.3e", refined.gap) +
        " refined, ratio " + fmt("%.2f", ratio);
    return coarse.gap <= 1e-3 && ratio >= 3.0;
  });

  // ---- criterion 6: eikonal exactness
  criterion(6, "zero-phase S matches -|x|^2 tan(t)/2 to 1e-10; residual <= 1e-6 for catalog phases",
            [&](std::string& d) {
              double worst_exact = 0.0;
              for (double t : {0.2, 0.5, 1.0}) {
                const PhaseField ph = phase_on_grid(t, grid, InitialPhase::zero());
                for (int p = 0; p < grid.num_points(); ++p) {
                  const double exact = -0.5 * grid.position(p).squaredNorm() * std::tan(t);
                  worst_exact = std::max(worst_exact, std::abs(ph.s_values[p] - exact));
                }
              }
              double worst_residual = 0.0;
              for (const auto& name : scenario_names()) {
                const Scenario s = scenario_of(catalog_config(name));
                const double h = 1e-5;
                for (double t : {0.5 * s.t_final, s.t_final}) {
                  const PhaseField mid = phase_on_grid(t, s.grid, s.phase);
                  const PhaseField up = phase_on_grid(t + h, s.grid, s.phase, {}, &mid);
                  const PhaseField down = phase_on_grid(t - h, s.grid, s.phase, {}, &mid);
                  for (int p = 0; p < s.grid.num_points(); ++p) {
                    const double st = (up.s_values[p] - down.s_values[p]) / (2 * h);
                    const double r =
                        st + 0.5 * mid.grad_s.col(p).squaredNorm() + 0.5 * s.grid.position(p).squaredNorm();
                    worst_residual = std::max(worst_residual, std::abs(r));
                  }
                }
              }
              d = "closed-form error " + fmt("%.2e", worst_exact) + ", residual " + fmt("%.2e", worst_residual);
              return worst_exact <= 1e-10 && worst_residual <= 1e-6;
            });

  // ---- criterion 7: nonlinearity cross-checks
  criterion(7, "F_av quadrature = resonance to 1e-12 on 100 fields; gauge and 2 pi periodicity to 1e-13",
            [&](std::string& d) {
              GridSpec g = grid;
              g.dim_d = 1;
              g.nx = 32;
              const HermiteBasis b = build_basis(g);
              std::mt19937 rng(2024);
              std::uniform_real_distribution<double> u(-1.0, 1.0);
              double forms = 0.0, gauge = 0.0, period = 0.0;
              for (int k = 0; k < 100; ++k) {
                const Field f = random_field(g, rng);
                const Field res = F_av_resonance(f, b);
                forms = std::max(forms, max_abs_diff(res.data, F_av_quadrature(f, b, min_theta_samples(b)).data));

                const double theta = 10 * u(rng);
                const Field ft = F(theta, f, b);
                period = std::max(period, max_abs_diff(F(theta + 2 * std::numbers::pi, f, b).data, ft.data));

                // x-dependent gauge e^{i S(x) / alpha} with a random quadratic S
                const double a = 3 * u(rng), c = u(rng), alpha = 0.05 + std::abs(u(rng));
                Field gf = f, gft = ft, gres = res;
                for (int p = 0; p < g.num_points(); ++p) {
                  const double x = g.coordinate(p);
                  const Complex ph = std::polar(1.0, (a * x + c * x * x) / alpha);
                  gf.data.col(p) *= ph;
                  gft.data.col(p) *= ph;
                  gres.data.col(p) *= ph;
                }
                gauge = std::max(gauge, max_abs_diff(F(theta, gf, b).data, gft.data));
                gauge = std::max(gauge, max_abs_diff(F_av_resonance(gf, b).data, gres.data));
              }
              d = "forms " + fmt("%.2e", forms) + ", gauge " + fmt("%.2e", gauge) + ", period " + fmt("%.2e", period);
              return forms <= 1e-12 && gauge <= 1e-13 && period <= 1e-13;
            });

  // ---- criterion 8: polarization
  criterion(8, "polarized data stay polarized (off-mode mass <= 1e-10); coefficient (2 pi)^{-1/2} to 1e-12",
            [&](std::string& d) {
              const Field a0 = sample_initial(InitialAmplitude::polarized_gaussian(), grid, basis);
              const double speed = max_phase_speed(grid, scenario.phase, scenario.t_final);
              double off = 0.0;
              for (Equation eq : {Equation::env_averaged, Equation::env_limit}) {
                const double alpha = eq == Equation::env_averaged ? config.fixed_alpha : 0.0;
                const double dt =
                    aligned_dt(scenario.t_final, dt_cap(eq, 1.0, alpha, grid, speed), config.records);
                PhaseProvider phase(grid, scenario.phase);
                const SolverParams p =
                    params(eq, 1.0, alpha, scenario.t_final, dt, step_count(scenario.t_final, dt) / config.records);
                for (const Field& f : solve_envelope(a0, p, phase, basis, speed).records)
                  off = std::max(off, off_mode_mass(f));
              }
              const HermiteBasis b1 = build_basis(1, grid.num_modes, grid.num_quad);
              Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(b1.mode_count(), 1);
              unit(0, 0) = 1.0;
              const Complex via_res = averaged_cubic_resonance(unit, b1)(0, 0);
              const Complex via_quad = averaged_cubic_quadrature(unit, b1, min_theta_samples(b1))(0, 0);
              const double coef_err = std::max(std::abs(via_res - kGamma0), std::abs(via_quad - kGamma0));
              d = "off-mode mass " + fmt("%.2e", off) + ", coefficient " + fmt("%.15f", via_res.real()) +
                  ", error " + fmt("%.1e", coef_err);
              return off <= 1e-10 && coef_err <= 1e-12;
            });

  // ---- criterion 9: conservation
  criterion(9, "GPE mass drift <= 1e-10; propagate unitarity <= 1e-13", [&](std::string& d) {
    std::mt19937 rng(7);
    std::normal_distribution<double> n01;
    double unitarity = 0.0;
    for (int dim_d : {1, 2}) {
      const HermiteBasis b = dim_d == 1 ? basis : build_basis(2, 8, 24);
      for (int k = 0; k < 50; ++k) {
        std::vector<Complex> c(b.mode_count());
        for (auto& v : c) v = Complex(n01(rng), n01(rng));
        double norm_in = 0.0;
        for (const auto& v : c) norm_in += std::norm(v);
        const double theta = 40.0 * (k - 25);
        const auto out = propagate(theta, c, b);
        double norm_out = 0.0;
        for (const auto& v : out) norm_out += std::norm(v);
        unitarity = std::max(unitarity, std::abs(std::sqrt(norm_out) - std::sqrt(norm_in)) / std::sqrt(norm_in));
      }
    }
    // one more GPE run from two-mode data besides the criterion 5 runs
    const Field psi0 = sample_initial(InitialAmplitude::two_mode(0.8, 0.6), grid, basis);
    const double dt = common_dt(scenario, grid, 0.35, 0.2, config.records);
    const Trajectory tr = solve_gpe(psi0, params(Equation::gpe_full, 0.35, 0.2, scenario.t_final, dt, 1), basis);
    const double m0 = mass_coefficients(psi0);
    for (const Field& f : tr.records) worst_mass_drift = std::max(worst_mass_drift, std::abs(mass_coefficients(f) - m0));
    d = "mass drift " + fmt("%.2e", worst_mass_drift) + ", unitarity " + fmt("%.2e", unitarity);
    return worst_mass_drift <= 1e-10 && unitarity <= 1e-13;
  });

  // ---- criterion 10: rays
  criterion(10, "rays vs env_limit relative L^2 <= 1e-4; linear amplitude law to 1e-10", [&](std::string& d) {
    double worst_rel = 0.0;
    for (const auto& name : scenario_names()) {
      const Scenario s = scenario_of(catalog_config(name));
      const HermiteBasis b = build_basis(s.grid);
      const Field a0 = sample_initial(s.amplitude, s.grid, b);
      const double speed = max_phase_speed(s.grid, s.phase, s.t_final);
      const double dt = aligned_dt(s.t_final, dt_cap(Equation::env_limit, 1.0, 0.0, s.grid, speed), 1);
      const SolverParams p = params(Equation::env_limit, 1.0, 0.0, s.t_final, dt, step_count(s.t_final, dt));
      PhaseProvider phase(s.grid, s.phase);
      const Field grid_sol = solve_envelope(a0, p, phase, b, speed).final_state();
      const Field ray_sol = rays_to_field(solve_rays(a0, p, s.phase, b), s.grid);
      const double rel = l2_norm(grid_sol - ray_sol) / l2_norm(grid_sol);
      worst_rel = std::max(worst_rel, rel);
      d += name + " " + fmt("%.2e", rel) + ", ";
    }

    const auto amp = InitialAmplitude::two_mode(0.8, 0.6, -0.3);
    const auto s0 = InitialPhase::quadratic(-0.5);
    const Field a0 = sample_initial(amp, grid, basis);
    const double t = 0.4;
    SolverParams p = params(Equation::env_limit, 1.0, 0.0, t, 0.002, step_count(t, 0.002));
    p.nonlinear_strength = 0.0;
    const RaySolution rays = solve_rays(a0, p, s0, basis);
    const double j = std::cos(t) - 0.5 * std::sin(t);
    double law = 0.0;
    for (std::size_t r = 0; r < rays.launch.size(); ++r) {
      for (int k = 0; k < basis.mode_count(); ++k) {
        law = std::max(law, std::abs(std::abs(rays.amplitudes(k, r)) -
                                     std::abs(amp.coefficient(rays.launch[r], k, basis)) / std::sqrt(j)));
      }
    }
    d += "amplitude law " + fmt("%.2e", law);
    return worst_rel <= 1e-4 && law <= 1e-10;
  });

  std::printf("acceptance: %s (%d failing)\n", failures == 0 ? "PASS" : "FAIL", failures);
  return failures == 0 ? 0 : 1;
}
