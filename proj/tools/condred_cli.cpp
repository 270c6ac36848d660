// condred: command-line front end for the dimension-reduction study.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "condred/config.hpp"
#include "condred/convergence_lab.hpp"
#include "condred/dynamics.hpp"
#include "condred/eikonal.hpp"
#include "condred/error.hpp"

namespace fs = std::filesystem;
using namespace condred;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<double> eps;
  std::optional<double> alpha;
  std::string out_dir;
  std::string format;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "study configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--eps", o.eps, "epsilon (transversal confinement)");
  cmd->add_option("--alpha", o.alpha, "alpha (semiclassical parameter)");
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json", "svg"}));
  cmd->add_flag("--quiet", o.quiet, "suppress progress output");
}

StudyConfig load(const CommonOptions& o) {
  StudyConfig c = o.config_path.empty() ? parse_config("") : load_config(o.config_path);
  if (!o.out_dir.empty()) c.output_dir = o.out_dir;
  return c;
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io_failure, "cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

int run_solve(const CommonOptions& o, const std::string& equation_name, std::optional<double> time) {
  const StudyConfig c = load(o);
  const auto eq = equation_from_string(equation_name);
  if (!eq) throw Error(ErrorKind::invalid_argument, "unknown equation '" + equation_name + "'");
  Scenario s = scenario_of(c);
  if (time) s.t_final = *time;
  const double eps = o.eps.value_or(c.fixed_eps);
  const double alpha = has_dispersion(*eq) ? o.alpha.value_or(c.fixed_alpha) : 0.0;

  const HermiteBasis basis = build_basis(s.grid);
  const Field a0 = sample_initial(s.amplitude, s.grid, basis);
  const double speed = max_phase_speed(s.grid, s.phase, s.t_final);
  SolverParams p;
  p.equation = *eq;
  p.epsilon = eps;
  p.alpha = alpha;
  p.t_final = s.t_final;
  p.dt = aligned_dt(s.t_final, c.dt_safety * dt_cap(*eq, eps, alpha, s.grid, speed), c.records);
  p.record_every = step_count(s.t_final, p.dt) / c.records;

  Trajectory traj;
  if (*eq == Equation::gpe_full) {
    if (!(alpha > 0.0)) throw Error(ErrorKind::nonpositive_input, "gpe_full requires alpha > 0");
    // WKB data A_0 e^{i S_0 / alpha}
    Field psi0 = a0;
    for (int q = 0; q < s.grid.num_points(); ++q) {
      psi0.data.col(q) *= std::polar(1.0, s.phase.value(s.grid.position(q)) / alpha);
    }
    traj = solve_gpe(psi0, p, basis);
  } else {
    PhaseProvider phase(s.grid, s.phase);
    traj = solve_envelope(a0, p, phase, basis, speed);
  }

  const fs::path dir = prepare_dir(c.output_dir);
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    char stem[64];
    std::snprintf(stem, sizeof stem, "%s_%03zu", equation_name.c_str(), k);
    write_snapshot(traj.records[k], dir / (std::string(stem) + ".csv"), dir / (std::string(stem) + ".json"));
  }
  if (!o.quiet) {
    std::printf("%s eps=%g alpha=%g: %d steps of %.6g, %zu snapshots in %s, final mass %.15g\n",
                equation_name.c_str(), eps, alpha, traj.steps, traj.dt, traj.records.size(), dir.string().c_str(),
                mass_coefficients(traj.final_state()));
  }
  return 0;
}

int run_sweep(const CommonOptions& o) {
  StudyConfig c = load(o);
  if (o.eps) c.eps = {*o.eps};
  if (o.alpha) c.alpha = {*o.alpha};
  validate_config(c);
  if (!o.quiet) std::printf("running %s with %d worker(s)\n", c.scenario.c_str(), worker_count(resources_of(c)));
  const ConvergenceReport report = run_study(scenario_of(c), sweep_of(c), resources_of(c));
  const fs::path dir = prepare_dir(c.output_dir);
  std::vector<std::string> formats = c.formats;
  if (!o.format.empty()) formats = {o.format};
  for (const auto& f : formats) {
    const fs::path path = dir / ("report." + f);
    emit(report, *format_from_string(f), path);
    if (!o.quiet) std::printf("wrote %s\n", path.string().c_str());
  }
  if (!o.quiet) {
    for (const auto& [pair, fit] : report.slopes) {
      std::printf("%s slope %.4f +- %.4f\n", std::string(to_string(pair)).c_str(), fit.value, fit.std_error);
    }
    for (const auto& g : report.guards) {
      std::printf("guard %s: error %.6g, refined %.6g, change %.2f%%\n", std::string(to_string(g.pair)).c_str(),
                  g.error, g.refined_error, 100.0 * g.relative_change);
    }
  }
  if (report.incomplete) {
    for (const auto& f : report.failures) std::cerr << "condred: cell failed: " << f << "\n";
    return 2;
  }
  return 0;
}

int run_eikonal(const CommonOptions& o, std::optional<double> time) {
  const StudyConfig c = load(o);
  const Scenario s = scenario_of(c);
  const double t = time.value_or(s.t_final);
  // Past the first caustic the ray map may still be invertible (a linear map
  // that has flipped orientation), so check the time against the caustic first.
  const double tc = caustic_time(s.phase, s.grid);
  if (t >= tc) {
    throw Error(ErrorKind::caustic_reached,
                "caustic reached: t = " + std::to_string(t) + " is past the caustic time " + std::to_string(tc));
  }
  const PhaseField phase = phase_on_grid(t, s.grid, s.phase);
  const fs::path dir = prepare_dir(c.output_dir);
  const fs::path path = dir / "phase.csv";
  write_phase_csv(phase, s.grid, path.string());
  if (!o.quiet) {
    std::printf("phase %s at t = %g: min |J| = %.6g, wrote %s\n", s.phase.name().c_str(), t, phase.min_jacobian,
                path.string().c_str());
  }
  return 0;
}

int run_report(const CommonOptions& o, const std::string& input) {
  const ConvergenceReport report = read_report(input);
  const fs::path in(input);
  const fs::path dir = prepare_dir(o.out_dir.empty() ? (in.has_parent_path() ? in.parent_path().string() : ".")
                                                     : o.out_dir);
  const std::string format = o.format.empty() ? "svg" : o.format;
  const fs::path path = dir / (in.stem().string() + "." + format);
  emit(report, *format_from_string(format), path);
  if (!o.quiet) std::printf("wrote %s\n", path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"condred: strongly confined GPE dimension-reduction study"};
  app.require_subcommand(1);

  CommonOptions solve_opts, sweep_opts, eikonal_opts, report_opts;
  std::string equation = "env_full";
  std::optional<double> solve_time, eikonal_time;
  std::string report_input;

  auto* solve = app.add_subcommand("solve", "run one (eps, alpha) cell and write field snapshots");
  add_common(solve, solve_opts);
  solve->add_option("--equation", equation, "gpe_full | env_full | env_averaged | env_oscillatory | env_limit");
  solve->add_option("--time", solve_time, "final time (default: config t_final)");

  auto* sweep = app.add_subcommand("sweep", "run the convergence study and write reports");
  add_common(sweep, sweep_opts);

  auto* eikonal = app.add_subcommand("eikonal", "write the phase S, grad S, Lap S on the grid");
  add_common(eikonal, eikonal_opts);
  eikonal->add_option("--time", eikonal_time, "evaluation time (default: config t_final)");

  auto* report = app.add_subcommand("report", "re-render a JSON report");
  report->add_option("input", report_input, "report JSON")->required()->check(CLI::ExistingFile);
  add_common(report, report_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) return run_solve(solve_opts, equation, solve_time);
    if (*sweep) return run_sweep(sweep_opts);
    if (*eikonal) return run_eikonal(eikonal_opts, eikonal_time);
    if (*report) return run_report(report_opts, report_input);
  } catch (const Error& e) {
    std::cerr << "condred: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return is_numerical(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "condred: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
