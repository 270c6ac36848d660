#include "condred/convergence_lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>
#include <tuple>

#include "condred/error.hpp"

namespace condred {

std::string_view to_string(LimitPair pair) {
  switch (pair) {
    case LimitPair::eq17: return "eq17";
    case LimitPair::eq18: return "eq18";
    case LimitPair::eq19: return "eq19";
    case LimitPair::eq20: return "eq20";
    case LimitPair::eq21: return "eq21";
    case LimitPair::identity: return "identity";
  }
  return "unknown";
}

std::optional<LimitPair> pair_from_string(std::string_view name) {
  for (auto p : {LimitPair::eq17, LimitPair::eq18, LimitPair::eq19, LimitPair::eq20, LimitPair::eq21,
                 LimitPair::identity}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

bool sweeps_epsilon(LimitPair pair) { return pair != LimitPair::eq19 && pair != LimitPair::eq20; }

int worker_count(const StudyResources& resources) {
  int n = resources.threads;
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CONDRED_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(1, n);
}

std::vector<CellResult> ConvergenceReport::curve(LimitPair pair) const {
  std::vector<CellResult> out;
  for (const auto& c : cells)
    if (c.pair == pair) out.push_back(c);
  return out;
}

bool ConvergenceReport::guard_passed() const {
  if (guards.empty()) return false;
  return std::all_of(guards.begin(), guards.end(),
                     [](const GuardResult& g) { return g.relative_change < kGuardTolerance; });
}

SlopeFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error(ErrorKind::length_mismatch, "fit_rate: xs and ys differ in length");
  if (xs.size() < 3) throw Error(ErrorKind::too_few_points, "fit_rate: at least 3 points are required");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
      throw Error(ErrorKind::nonpositive_input, "fit_rate: values must be positive for a log-log fit");
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::invalid_argument, "fit_rate: xs must not all coincide");
  SlopeFit fit;
  fit.value = sxy / sxx;
  const double intercept = my - fit.value * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - intercept - fit.value * lx[i];
    ssr += r * r;
  }
  fit.std_error = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return fit;
}

namespace {

struct RunKey {
  Equation equation;
  double epsilon;
  double alpha;
  int refine;

  auto operator<=>(const RunKey&) const = default;
};

RunKey normalized(Equation eq, double eps, double alpha, int refine) {
  return {eq, is_oscillatory(eq) ? eps : 0.0, has_dispersion(eq) ? alpha : 0.0, refine};
}

struct CellPlan {
  LimitPair pair;
  double epsilon;
  double alpha;
  RunKey first;
  RunKey second;
};

CellPlan plan_cell(LimitPair pair, double value, const SweepSpec& sweep, int refine) {
  switch (pair) {
    case LimitPair::eq17:
      return {pair, value, sweep.fixed_alpha, normalized(Equation::env_full, value, sweep.fixed_alpha, refine),
              normalized(Equation::env_averaged, value, sweep.fixed_alpha, refine)};
    case LimitPair::eq18:
      return {pair, value, 0.0, normalized(Equation::env_oscillatory, value, 0.0, refine),
              normalized(Equation::env_limit, value, 0.0, refine)};
    case LimitPair::eq19:
      return {pair, sweep.fixed_epsilon, value, normalized(Equation::env_full, sweep.fixed_epsilon, value, refine),
              normalized(Equation::env_oscillatory, sweep.fixed_epsilon, value, refine)};
    case LimitPair::eq20:
      return {pair, sweep.fixed_epsilon, value, normalized(Equation::env_averaged, sweep.fixed_epsilon, value, refine),
              normalized(Equation::env_limit, sweep.fixed_epsilon, value, refine)};
    case LimitPair::eq21:
      return {pair, value, value * value, normalized(Equation::env_full, value, value * value, refine),
              normalized(Equation::env_limit, value, value * value, refine)};
    case LimitPair::identity: {
      const RunKey k = normalized(Equation::env_full, value, sweep.fixed_alpha, refine);
      return {pair, value, sweep.fixed_alpha, k, k};
    }
  }
  throw Error(ErrorKind::invalid_argument, "unknown limit pair");
}

struct RunOutcome {
  std::optional<Trajectory> trajectory;
  double seconds = 0.0;
  std::string failure;
};

GridSpec refined_grid(const GridSpec& grid) {
  GridSpec g = grid;
  g.nx *= 2;
  return g;
}

class RunTable {
 public:
  RunTable(const Scenario& scenario, const HermiteBasis& basis, const StudyResources& resources)
      : scenario_(scenario), basis_(basis), resources_(resources) {}

  void request(const RunKey& key) { outcomes_.try_emplace(key); }

  std::vector<RunKey> keys(int refine) const {
    std::vector<RunKey> out;
    for (const auto& [k, _] : outcomes_)
      if (k.refine == refine) out.push_back(k);
    return out;
  }

  // Oscillatory runs share one step and the others another; both split
  // t_final into the same record times. Refined runs at most halve the step.
  void execute(int refine, double speed) {
    const GridSpec grid = refine ? refined_grid(scenario_.grid) : scenario_.grid;
    const std::vector<RunKey> todo = keys(refine);
    for (bool oscillatory : {true, false}) {
      double cap = std::numeric_limits<double>::infinity();
      for (const auto& k : todo) {
        if (is_oscillatory(k.equation) != oscillatory) continue;
        const double eps = oscillatory ? k.epsilon : 1.0;
        cap = std::min(cap, dt_cap(k.equation, eps, k.alpha, grid, speed));
      }
      if (!std::isfinite(cap)) continue;
      double target = cap * resources_.dt_safety;
      if (const auto base = dt_.find({0, oscillatory}); refine && base != dt_.end()) {
        target = std::min(target, 0.5 * base->second);
      }
      dt_[{refine, oscillatory}] = aligned_dt(scenario_.t_final, target, resources_.records);
    }
    const Field a0 = sample_initial(scenario_.amplitude, grid, basis_);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < todo.size(); i = next++) {
        const RunKey& key = todo[i];
        RunOutcome& out = outcomes_.at(key);
        SolverParams p;
        p.equation = key.equation;
        p.epsilon = is_oscillatory(key.equation) ? key.epsilon : 1.0;
        p.alpha = key.alpha;
        p.t_final = scenario_.t_final;
        p.dt = dt_.at({refine, is_oscillatory(key.equation)});
        p.record_every = std::max(1, step_count(p.t_final, p.dt) / resources_.records);
        const auto start = std::chrono::steady_clock::now();
        try {
          PhaseProvider phase(grid, scenario_.phase);
          out.trajectory = solve_envelope(a0, p, phase, basis_, speed);
        } catch (const std::exception& e) {
          out.failure = std::string(to_string(key.equation)) + ": " + e.what();
        }
        out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    };
    const int workers = std::min<int>(worker_count(resources_), static_cast<int>(todo.size()));
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
  }

  /// Smallest step used at a refinement level.
  double min_dt(int refine) const {
    double dt = std::numeric_limits<double>::infinity();
    for (const auto& [k, v] : dt_)
      if (k.first == refine) dt = std::min(dt, v);
    return dt;
  }

  const RunOutcome& outcome(const RunKey& key) const { return outcomes_.at(key); }

 private:
  const Scenario& scenario_;
  const HermiteBasis& basis_;
  StudyResources resources_;
  std::map<RunKey, RunOutcome> outcomes_;
  std::map<std::pair<int, bool>, double> dt_;
};

std::string describe(const CellPlan& cell) {
  char buf[96];
  std::snprintf(buf, sizeof buf, " (eps = %g, alpha = %g)", cell.epsilon, cell.alpha);
  return std::string(to_string(cell.pair)) + buf;
}

// Max over the common record times of the B^{m-2} distance.
double trajectory_distance(const Trajectory& a, const Trajectory& b, int order, const HermiteBasis& basis) {
  if (a.records.size() != b.records.size()) {
    throw Error(ErrorKind::time_mismatch, "trajectories recorded at different times");
  }
  double err = 0.0;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    err = std::max(err, bm_error(a.records[i], b.records[i], order, basis));
  }
  return err;
}

void validate_sweep(const Scenario& scenario, const SweepSpec& sweep, const StudyResources& resources) {
  scenario.grid.validate();
  auto check_unit = [](double v, const char* what) {
    if (!(v > 0.0) || v > 1.0) {
      throw Error(ErrorKind::invalid_argument, std::string(what) + " must lie in (0, 1]");
    }
  };
  for (double e : sweep.epsilons) check_unit(e, "sweep epsilon");
  for (double a : sweep.alphas) check_unit(a, "sweep alpha");
  check_unit(sweep.fixed_alpha, "fixed alpha");
  check_unit(sweep.fixed_epsilon, "fixed epsilon");
  if (!(scenario.t_final > 0.0)) throw Error(ErrorKind::invalid_argument, "t_final must be positive");
  if (!(resources.dt_safety > 0.0) || resources.dt_safety > 1.0) {
    throw Error(ErrorKind::invalid_argument, "dt_safety must lie in (0, 1]");
  }
  if (resources.records < 1) throw Error(ErrorKind::invalid_argument, "records must be >= 1");
  if (resources.regularity < 2) throw Error(ErrorKind::negative_order, "regularity must be >= 2");
  const double tc = caustic_time(scenario.phase, scenario.grid);
  if (!(scenario.t_final < tc - 0.05)) {
    throw Error(ErrorKind::caustic_reached, "caustic reached: t_final " + std::to_string(scenario.t_final) +
                                                " is within 0.05 of the caustic time " + std::to_string(tc));
  }
}

const std::vector<double>& sweep_values(LimitPair pair, const SweepSpec& sweep) {
  return sweeps_epsilon(pair) ? sweep.epsilons : sweep.alphas;
}

}  // namespace

ConvergenceReport run_study(const Scenario& scenario, const SweepSpec& sweep, const StudyResources& resources) {
  validate_sweep(scenario, sweep, resources);
  const HermiteBasis basis = build_basis(scenario.grid);
  const int order = resources.regularity - 2;

  std::vector<CellPlan> cells;
  for (LimitPair pair : sweep.pairs)
    for (double v : sweep_values(pair, sweep)) cells.push_back(plan_cell(pair, v, sweep, 0));

  std::vector<CellPlan> guard_cells;
  if (sweep.guard) {
    for (LimitPair pair : sweep.pairs) {
      if (pair == LimitPair::identity) continue;
      const auto& values = sweep_values(pair, sweep);
      if (values.empty()) continue;
      guard_cells.push_back(plan_cell(pair, *std::min_element(values.begin(), values.end()), sweep, 1));
    }
  }

  RunTable table(scenario, basis, resources);
  for (const auto& c : cells) {
    table.request(c.first);
    table.request(c.second);
  }
  for (const auto& c : guard_cells) {
    table.request(c.first);
    table.request(c.second);
  }

  ConvergenceReport report;
  report.scenario = scenario.name;
  report.grid = scenario.grid;
  report.epsilon_list = sweep.epsilons;
  report.alpha_list = sweep.alphas;
  report.fixed_alpha = sweep.fixed_alpha;
  report.fixed_epsilon = sweep.fixed_epsilon;
  report.t_final = scenario.t_final;
  report.regularity = resources.regularity;

  const double speed = max_phase_speed(scenario.grid, scenario.phase, scenario.t_final);
  table.execute(0, speed);
  report.dt = table.min_dt(0);

  auto evaluate = [&](const CellPlan& c, double& error, double& seconds) -> bool {
    const RunOutcome& a = table.outcome(c.first);
    const RunOutcome& b = table.outcome(c.second);
    for (const RunOutcome* r : {&a, &b}) {
      if (!r->trajectory) {
        report.failures.push_back(describe(c) + ": " + r->failure);
        return false;
      }
    }
    const auto start = std::chrono::steady_clock::now();
    try {
      error = trajectory_distance(*a.trajectory, *b.trajectory, order, basis);
    } catch (const std::exception& e) {
      report.failures.push_back(describe(c) + ": " + e.what());
      return false;
    }
    seconds = a.seconds + (c.first == c.second ? 0.0 : b.seconds) +
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!resources.timings) seconds = 0.0;
    return true;
  };

  for (const auto& c : cells) {
    CellResult cell{c.pair, c.epsilon, c.alpha, 0.0, 0.0};
    if (evaluate(c, cell.error, cell.seconds)) {
      report.cells.push_back(cell);
    } else {
      report.incomplete = true;
    }
  }

  if (!guard_cells.empty()) {
    const GridSpec fine = refined_grid(scenario.grid);
    const double fine_speed = max_phase_speed(fine, scenario.phase, scenario.t_final);
    table.execute(1, fine_speed);
    for (const auto& c : guard_cells) {
      GuardResult g{c.pair, c.epsilon, c.alpha, 0.0, 0.0, 0.0};
      const auto base = std::find_if(report.cells.begin(), report.cells.end(), [&](const CellResult& r) {
        return r.pair == c.pair && r.epsilon == c.epsilon && r.alpha == c.alpha;
      });
      double seconds = 0.0;
      if (base == report.cells.end() || !evaluate(c, g.refined_error, seconds)) {
        report.incomplete = true;
        continue;
      }
      g.error = base->error;
      g.relative_change = std::abs(g.refined_error - g.error) / std::max(g.error, 1e-300);
      report.guards.push_back(g);
    }
  }

  for (LimitPair pair : sweep.pairs) {
    if (pair == LimitPair::identity) continue;
    const auto curve = report.curve(pair);
    if (curve.size() < 3) {
      report.missing_slopes = true;
      continue;
    }
    std::vector<double> xs, ys;
    for (const auto& c : curve) {
      xs.push_back(sweeps_epsilon(pair) ? c.epsilon : c.alpha);
      ys.push_back(c.error);
    }
    try {
      report.slopes[pair] = fit_rate(xs, ys);
    } catch (const Error& e) {
      report.missing_slopes = true;
      report.failures.push_back(std::string(to_string(pair)) + " slope: " + e.what());
    }
  }
  return report;
}

ErrorCurve error_curve(LimitPair pair, double fixed, const std::vector<double>& sweep, const Scenario& scenario,
                       const StudyResources& resources) {
  SweepSpec spec;
  spec.pairs = {pair};
  spec.guard = false;
  if (sweeps_epsilon(pair)) {
    spec.epsilons = sweep;
    if (pair == LimitPair::eq17 || pair == LimitPair::identity) spec.fixed_alpha = fixed;
  } else {
    spec.alphas = sweep;
    spec.fixed_epsilon = fixed;
  }
  const ConvergenceReport report = run_study(scenario, spec, resources);
  if (report.incomplete) throw Error(ErrorKind::cell_failure, report.failures.front());
  ErrorCurve out;
  for (const auto& c : report.cells) {
    out.values.push_back(sweeps_epsilon(pair) ? c.epsilon : c.alpha);
    out.errors.push_back(c.error);
  }
  return out;
}

}  // namespace condred
