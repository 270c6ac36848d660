#pragma once

// (eps, alpha) sweeps over the envelope solvers, log-log rate fits and
// report emission.
//
// Limit pairs and the solvers they compare:
//   eq17  env_full        vs env_averaged   eps-sweep at fixed alpha
//   eq18  env_oscillatory vs env_limit      eps-sweep, alpha = 0
//   eq19  env_full        vs env_oscillatory alpha-sweep at fixed eps
//   eq20  env_averaged    vs env_limit      alpha-sweep
//   eq21  env_full        vs env_limit      eps-sweep along alpha = eps^2
//   identity  env_full against itself (debug)

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "condred/dynamics.hpp"
#include "condred/eikonal.hpp"
#include "condred/field_space.hpp"

namespace condred {

enum class LimitPair { eq17, eq18, eq19, eq20, eq21, identity };

std::string_view to_string(LimitPair pair);
std::optional<LimitPair> pair_from_string(std::string_view name);
/// True when the pair sweeps eps (false: sweeps alpha).
bool sweeps_epsilon(LimitPair pair);

struct Scenario {
  std::string name = "polarized_baseline";
  GridSpec grid;
  InitialPhase phase;
  InitialAmplitude amplitude;
  double t_final = 0.5;
};

struct StudyResources {
  int threads = 0;         // 0: CONDRED_THREADS, else the hardware count
  double dt_safety = 1.0;  // the common step is dt_safety times the smallest cap
  int records = 20;        // recorded times per run besides t = 0
  int regularity = 4;      // m; errors are measured in B^{m-2}
  bool timings = true;     // false writes seconds = 0 for reproducible output
};

/// Worker count after applying CONDRED_THREADS.
int worker_count(const StudyResources& resources);

struct SweepSpec {
  std::vector<double> epsilons{0.5, 0.4, 0.3, 0.22};
  std::vector<double> alphas{0.4, 0.28, 0.2, 0.14};
  double fixed_alpha = 0.2;
  double fixed_epsilon = 0.35;
  std::vector<LimitPair> pairs{LimitPair::eq17, LimitPair::eq18, LimitPair::eq19, LimitPair::eq20, LimitPair::eq21};
  bool guard = true;  // rerun the finest cell of each pair at doubled nx and halved dt
};

struct CellResult {
  LimitPair pair = LimitPair::eq17;
  double epsilon = 0.0;
  double alpha = 0.0;
  double error = 0.0;
  double seconds = 0.0;

  bool operator==(const CellResult&) const = default;
};

struct SlopeFit {
  double value = 0.0;
  double std_error = 0.0;

  bool operator==(const SlopeFit&) const = default;
};

struct GuardResult {
  LimitPair pair = LimitPair::eq17;
  double epsilon = 0.0;
  double alpha = 0.0;
  double error = 0.0;
  double refined_error = 0.0;
  double relative_change = 0.0;

  bool operator==(const GuardResult&) const = default;
};

inline constexpr double kGuardTolerance = 0.1;

struct ConvergenceReport {
  std::string scenario;
  GridSpec grid;
  std::vector<double> epsilon_list;
  std::vector<double> alpha_list;
  double fixed_alpha = 0.0;
  double fixed_epsilon = 0.0;
  double t_final = 0.0;
  double dt = 0.0;  // smallest time step of the study
  int regularity = 4;
  std::vector<CellResult> cells;  // sorted by pair, then by sweep value descending
  std::map<LimitPair, SlopeFit> slopes;
  std::vector<GuardResult> guards;
  bool incomplete = false;      // some cell failed
  bool missing_slopes = false;  // some pair had fewer than 3 points
  std::vector<std::string> failures;

  bool operator==(const ConvergenceReport&) const = default;

  std::vector<CellResult> curve(LimitPair pair) const;
  bool guard_passed() const;
};

/// Ordinary least squares of log y on log x.
SlopeFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys);

struct ErrorCurve {
  std::vector<double> values;
  std::vector<double> errors;
};

/// Max-in-time B^{m-2} errors of one pair over one sweep. `fixed` is alpha
/// for eq17/identity, eps for eq19/eq20 and unused for eq18/eq21.
ErrorCurve error_curve(LimitPair pair, double fixed, const std::vector<double>& sweep, const Scenario& scenario,
                       const StudyResources& resources = {});

ConvergenceReport run_study(const Scenario& scenario, const SweepSpec& sweep, const StudyResources& resources = {});

enum class ReportFormat { csv, json, svg };

std::optional<ReportFormat> format_from_string(std::string_view name);
std::string_view to_string(ReportFormat format);

std::string report_csv(const ConvergenceReport& report);
std::string report_json(const ConvergenceReport& report);
std::string report_svg(const ConvergenceReport& report);
ConvergenceReport parse_report_json(const std::string& text);

void emit(const ConvergenceReport& report, ReportFormat format, const std::filesystem::path& path);
ConvergenceReport read_report(const std::filesystem::path& path);

}  // namespace condred
