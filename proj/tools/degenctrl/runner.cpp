#include "runner.hpp"

#include <cmath>
#include <cstdio>

#include "degenctrl/carleman.hpp"
#include "degenctrl/catalog.hpp"
#include "degenctrl/convergence.hpp"
#include "degenctrl/errors.hpp"
#include "degenctrl/hum.hpp"
#include "degenctrl/nonlinear.hpp"
#include "degenctrl/weighted_control.hpp"

namespace degenctrl::cli {

namespace {

using Row = std::vector<Cell>;
using nlohmann::json;

std::vector<std::string> with_prefix(std::vector<std::string> tail) {
  std::vector<std::string> cols{"experiment", "alpha", "horizon", "omega_a", "omega_b", "grading"};
  cols.insert(cols.end(), tail.begin(), tail.end());
  return cols;
}

Row prefix(const ExperimentConfig& cfg, Interval omega) {
  return {to_string(cfg.kind), cfg.alpha, cfg.horizon, omega.a, omega.b, cfg.grading};
}

Row prefix(const ExperimentConfig& cfg) { return prefix(cfg, cfg.omega); }

void extend(Row& row, std::initializer_list<Cell> tail) { row.insert(row.end(), tail.begin(), tail.end()); }

long long count(std::size_t v) { return static_cast<long long>(v); }

std::string tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Task {
  std::size_t size_index = 0;
  double s = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  Interval window{};
};

struct Partial {
  std::vector<Row> rows;
  json summary = json::object();
  std::vector<std::string> violations;
  std::vector<std::string> unconverged;
  std::vector<std::pair<std::string, Field>> fields;
};

RunOutcome merge(std::vector<std::string> columns, std::vector<Partial> parts, json summary) {
  RunOutcome out;
  out.report = CsvTable(std::move(columns));
  json items = json::array();
  for (auto& p : parts) {
    for (auto& r : p.rows) out.report.add_row(std::move(r));
    if (!p.summary.empty()) items.push_back(std::move(p.summary));
    out.violations.insert(out.violations.end(), p.violations.begin(), p.violations.end());
    out.unconverged.insert(out.unconverged.end(), p.unconverged.begin(), p.unconverged.end());
    for (auto& f : p.fields) out.fields.push_back(std::move(f));
  }
  out.summary = std::move(summary);
  if (!items.empty()) out.summary["runs"] = std::move(items);
  return out;
}

Grid grid_for(const ExperimentConfig& cfg, std::size_t index) {
  return make_grid(cfg.sizes[index], cfg.grading, cfg.horizon, cfg.steps_for(index));
}

RunOutcome run_convergence(const ExperimentConfig& cfg) {
  const auto rows = manufactured_convergence(cfg.alpha, cfg.horizon, cfg.sizes, cfg.grading);
  Partial p;
  json summary = json::object();
  for (const auto& r : rows) {
    Row row = prefix(cfg);
    extend(row, {r.sweep, count(r.n), count(r.m), r.error, r.order});
    p.rows.push_back(std::move(row));
    summary[r.sweep + "_order"] = r.order;
  }
  return merge(with_prefix({"sweep", "n", "m", "error", "order"}), {std::move(p)}, summary);
}

std::vector<Task> parameter_tasks(const ExperimentConfig& cfg) {
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    for (double s : cfg.s_values) {
      for (double l : cfg.lambda_values) tasks.push_back({i, s, l, 0.0, {}});
    }
  }
  return tasks;
}

RunOutcome run_carleman(const ExperimentConfig& cfg, int jobs) {
  const ProblemSpec spec = cfg.problem();
  const WeightFamily family = cfg.family == "a" ? WeightFamily::a : WeightFamily::sigma;
  const auto tasks = parameter_tasks(cfg);
  auto parts = parallel_map<Partial>(tasks.size(), jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const Grid grid = grid_for(cfg, task.size_index);
    const CarlemanParams params{task.s, task.lambda};
    Partial p;
    double best = -std::numeric_limits<double>::infinity();
    int non_finite = 0;
    for (int d = 0; d < cfg.draws; ++d) {
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(d);
      const auto vt = random_terminal(*grid.mesh, seed);
      const CarlemanReport r = family == WeightFamily::sigma ? carleman_sigma(spec, grid, vt, nullptr, params)
                                                             : carleman_a(spec, grid, vt, nullptr, params);
      Row row = prefix(cfg);
      extend(row, {to_string(family), count(grid.nodes() - 1), count(grid.time.steps()), task.s, task.lambda,
                   static_cast<long long>(seed), r.log_lhs_terms[0], r.log_lhs_terms[1], r.log_lhs_terms[2],
                   r.log_lhs_terms[3], r.log_rhs_terms[0], r.log_rhs_terms[1], r.log_lhs, r.log_rhs, r.log_ratio,
                   to_string(r.status)});
      p.rows.push_back(std::move(row));
      if (r.status == RatioStatus::violation) {
        p.violations.push_back("Carleman right side vanished with a nonzero left side (seed " +
                               std::to_string(seed) + ")");
      }
      if (r.status == RatioStatus::ok && std::isfinite(r.log_ratio)) {
        best = std::max(best, r.log_ratio);
      } else {
        ++non_finite;
      }
    }
    p.summary = {{"n", grid.nodes() - 1}, {"s", task.s}, {"lambda", task.lambda}, {"log_c_emp", best},
                 {"non_finite", non_finite}};
    return p;
  });
  return merge(with_prefix({"family", "n", "m", "s", "lambda", "seed", "log_lhs_vt", "log_lhs_div", "log_lhs_grad",
                            "log_lhs_v", "log_rhs_h", "log_rhs_omega", "log_lhs", "log_rhs", "log_ratio", "status"}),
               std::move(parts), json::object());
}

RunOutcome run_observability(const ExperimentConfig& cfg, int jobs) {
  const ProblemSpec spec = cfg.problem();
  const WeightFamily family = cfg.family == "a" ? WeightFamily::a : WeightFamily::sigma;
  const auto tasks = parameter_tasks(cfg);
  auto parts = parallel_map<Partial>(tasks.size(), jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const Grid grid = grid_for(cfg, task.size_index);
    const CarlemanParams params{task.s, task.lambda};
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    Partial p;
    for (int d = 0; d < cfg.draws; ++d) {
      const auto vt = random_terminal(*grid.mesh, cfg.seed + static_cast<std::uint64_t>(d));
      const ObservabilityReport r = observability_constant(spec, grid, vt, params, family);
      if (r.status == RatioStatus::violation) p.violations.push_back("observation integral vanished");
      if (r.status != RatioStatus::ok) continue;
      hi = std::max(hi, r.log_constant);
      lo = std::min(lo, r.log_constant);
    }
    Row row = prefix(cfg);
    extend(row, {to_string(family), count(grid.nodes() - 1), count(grid.time.steps()), task.s, task.lambda,
                 static_cast<long long>(cfg.draws), hi, lo});
    p.rows.push_back(std::move(row));
    return p;
  });
  return merge(with_prefix({"family", "n", "m", "s", "lambda", "draws", "log_constant_max", "log_constant_min"}),
               std::move(parts), json::object());
}

RunOutcome run_hum(const ExperimentConfig& cfg, int jobs) {
  const ProblemSpec spec = cfg.problem();
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    for (double e : cfg.epsilons) tasks.push_back({i, 0.0, 0.0, e, {}});
  }
  auto parts = parallel_map<Partial>(tasks.size(), jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const Grid grid = grid_for(cfg, task.size_index);
    const HumConfig hum{task.epsilon, cfg.hum_cg_tol, cfg.hum_cg_maxit};
    const auto u0 = sample_initial(spec, *grid.mesh);
    const ControlResult r = HumSolver(spec, grid).solve(u0, hum);
    const double bound = r.free_final_norm * r.free_final_norm / task.epsilon;
    Partial p;
    Row row = prefix(cfg);
    extend(row, {count(grid.nodes() - 1), count(grid.time.steps()), task.epsilon, r.final_norm, r.free_final_norm,
                 r.control_cost, bound, r.j_value, static_cast<long long>(r.cg_iterations), r.cg_residual,
                 r.optimality_residual, static_cast<long long>(r.converged)});
    p.rows.push_back(std::move(row));
    const std::string where = "n=" + std::to_string(grid.nodes() - 1) + " epsilon=" + tag(task.epsilon);
    if (r.control_cost > bound * (1.0 + 1e-9) + 1e-300) p.violations.push_back("control cost above |u_free(T)|^2/epsilon at " + where);
    for (const auto& w : r.warnings) {
      if (w == "J(h) exceeds J(0)") p.violations.push_back(w + " at " + where);
    }
    if (!r.converged) p.unconverged.push_back("HUM conjugate gradients at " + where);
    if (cfg.dump_fields) {
      const std::string name = "n" + std::to_string(grid.nodes() - 1) + "_eps" + tag(task.epsilon);
      p.fields.emplace_back("hum_state_" + name, r.state);
      p.fields.emplace_back("hum_control_" + name, r.control);
    }
    return p;
  });
  return merge(with_prefix({"n", "m", "epsilon", "final_norm", "free_final_norm", "control_cost", "cost_bound",
                            "j_value", "cg_iterations", "cg_residual", "optimality_residual", "converged"}),
               std::move(parts), json::object());
}

WeightedControlConfig weighted_config(const ExperimentConfig& cfg, double s, double lambda) {
  WeightedControlConfig w;
  w.params = {s, lambda};
  w.log_cap = cfg.log_cap;
  w.cg_tol = cfg.weighted_cg_tol;
  w.cg_maxit = cfg.weighted_cg_maxit;
  w.track_objective = false;
  return w;
}

RunOutcome run_weighted(const ExperimentConfig& cfg, int jobs) {
  const ProblemSpec spec = cfg.problem();
  const auto tasks = parameter_tasks(cfg);
  auto parts = parallel_map<Partial>(tasks.size(), jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const Grid grid = grid_for(cfg, task.size_index);
    const WeightedController controller(spec, grid, weighted_config(cfg, task.s, task.lambda));
    const auto u0 = sample_initial(spec, *grid.mesh);
    const WeightedControlResult r = controller.solve(u0, nullptr);
    const EstimateReport est = additional_estimates(r, controller);
    const SupremoReport sup = supremo_check(r, controller);
    const double defect = chain_defect(controller.weights());
    const double u0_norm = vol_norm(*grid.mesh, u0);
    Partial p;
    Row row = prefix(cfg);
    extend(row, {count(grid.nodes() - 1), count(grid.time.steps()), task.s, task.lambda, cfg.log_cap, r.final_norm,
                 u0_norm, u0_norm > 0.0 ? r.final_norm / u0_norm : 0.0, r.objective, r.e_norm_sq, est.constant,
                 sup.ratio, static_cast<long long>(r.cg_iterations), static_cast<long long>(r.converged), defect});
    p.rows.push_back(std::move(row));
    const std::string where = "n=" + std::to_string(grid.nodes() - 1) + " s=" + tag(task.s);
    if (defect > 1e-12) p.violations.push_back("rho chain inequality fails at " + where);
    if (!r.converged) p.unconverged.push_back("weighted conjugate gradients at " + where);
    if (cfg.dump_fields) {
      p.fields.emplace_back("weighted_state_n" + std::to_string(grid.nodes() - 1) + "_s" + tag(task.s), r.state);
    }
    return p;
  });
  return merge(with_prefix({"n", "m", "s", "lambda", "log_cap", "final_norm", "u0_norm", "relative_final_norm",
                            "objective", "e_norm_sq", "estimate_constant", "supremo_ratio", "cg_iterations",
                            "converged", "chain_defect"}),
               std::move(parts), json::object());
}

PicardConfig picard_config(const ExperimentConfig& cfg) {
  PicardConfig p;
  p.tol = cfg.effective_picard_tol();
  p.max_iterations = cfg.picard_max_iterations;
  return p;
}

RunOutcome run_semilinear(const ExperimentConfig& cfg, int jobs) {
  const ProblemSpec spec = cfg.problem();
  const SemilinearSpec g = catalog::nonlinearity(cfg.g.name, cfg.g.scale, cfg.alpha);
  const HumConfig hum{cfg.epsilons.front(), cfg.hum_cg_tol, cfg.hum_cg_maxit};
  auto parts = parallel_map<Partial>(cfg.sizes.size(), jobs, [&](std::size_t i) {
    const Grid grid = grid_for(cfg, i);
    const auto u0 = sample_initial(spec, *grid.mesh);
    const SemilinearResult baseline = solve_semilinear_control(spec, SemilinearSpec{}, u0, hum, grid);
    Partial p;
    IterationTrace trace;
    bool converged = false;
    double final_norm = std::numeric_limits<double>::quiet_NaN();
    const std::string where = "n=" + std::to_string(grid.nodes() - 1);
    try {
      const SemilinearResult r = solve_semilinear_control(spec, g, u0, hum, grid, picard_config(cfg));
      trace = r.trace;
      converged = r.trace.converged;
      final_norm = r.control.final_norm;
      if (!r.control.converged) p.unconverged.push_back("HUM conjugate gradients at " + where);
      if (cfg.dump_fields) p.fields.emplace_back("semilinear_state_" + where.substr(2), r.control.state);
    } catch (const IterationFailure& e) {
      trace = e.trace();
      p.unconverged.push_back(std::string(e.what()) + " at " + where);
    }
    for (const auto& rec : trace.records) {
      Row row = prefix(cfg);
      extend(row, {count(grid.nodes() - 1), count(grid.time.steps()), hum.epsilon, cfg.g.name, cfg.g.scale,
                   static_cast<long long>(rec.iteration), rec.coefficient_norm, rec.control_cost, rec.final_norm,
                   rec.distance, rec.damping, baseline.control.final_norm, static_cast<long long>(converged)});
      p.rows.push_back(std::move(row));
      if (rec.coefficient_norm > 2.0 * g.lipschitz * (1.0 + 1e-12)) {
        p.violations.push_back("coefficient bound above 2K at " + where);
      }
    }
    p.summary = {{"n", grid.nodes() - 1},
                 {"final_norm", final_norm},
                 {"baseline_final_norm", baseline.control.final_norm},
                 {"iterations", trace.iterations}};
    return p;
  });
  return merge(with_prefix({"n", "m", "epsilon", "g", "g_scale", "iteration", "coefficient_norm", "control_cost",
                            "final_norm", "distance", "damping", "baseline_final_norm", "converged"}),
               std::move(parts), json::object());
}

RunOutcome run_nonlocal(const ExperimentConfig& cfg, int jobs) {
  const ProblemSpec spec = cfg.problem();
  const NonlocalSpec ell = catalog::nonlocal(cfg.ell.name, cfg.ell.scale);
  const auto tasks = parameter_tasks(cfg);
  auto parts = parallel_map<Partial>(tasks.size(), jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const Grid grid = grid_for(cfg, task.size_index);
    const auto u0 = sample_initial(spec, *grid.mesh);
    NonlocalConfig nc;
    nc.weighted = weighted_config(cfg, task.s, task.lambda);
    nc.picard = picard_config(cfg);
    if (cfg.radius > 0.0) nc.radius = cfg.radius;
    Partial p;
    IterationTrace trace;
    double residual = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    const std::string where = "n=" + std::to_string(grid.nodes() - 1) + " s=" + tag(task.s);
    try {
      const NonlocalResult r = solve_nonlocal_control(spec, ell, u0, grid, nc);
      trace = r.trace;
      residual = r.nonlinear_residual;
      converged = r.trace.converged;
      if (!r.control.converged) p.unconverged.push_back("weighted conjugate gradients at " + where);
      if (cfg.dump_fields) p.fields.emplace_back("nonlocal_state_n" + std::to_string(grid.nodes() - 1), r.control.state);
    } catch (const IterationFailure& e) {
      trace = e.trace();
      const bool radius = e.kind() == IterationFailureKind::local_radius_exceeded;
      p.unconverged.push_back(std::string(radius ? "local radius exceeded: " : "") + e.what() + " at " + where);
    }
    for (const auto& rec : trace.records) {
      Row row = prefix(cfg);
      extend(row, {count(grid.nodes() - 1), count(grid.time.steps()), task.s, task.lambda, cfg.ell.name, cfg.ell.scale,
                   static_cast<long long>(rec.iteration), rec.coefficient_norm, rec.control_cost, rec.final_norm,
                   rec.distance, rec.damping, residual, static_cast<long long>(converged)});
      p.rows.push_back(std::move(row));
    }
    return p;
  });
  return merge(with_prefix({"n", "m", "s", "lambda", "ell", "slope", "iteration", "ell_gap", "control_cost",
                            "final_norm", "distance", "damping", "nonlinear_residual", "converged"}),
               std::move(parts), json::object());
}

RunOutcome run_windows(const ExperimentConfig& cfg, int jobs) {
  ProblemSpec spec = cfg.problem();
  spec.geometric = false;
  const HumConfig hum{cfg.epsilons.front(), cfg.hum_cg_tol, cfg.hum_cg_maxit};
  std::vector<Task> tasks;
  for (const Interval& w : cfg.windows) {
    for (std::size_t i = 0; i < cfg.sizes.size(); ++i) tasks.push_back({i, 0.0, 0.0, hum.epsilon, w});
  }
  auto parts = parallel_map<Partial>(tasks.size(), jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const auto rows = control_cost_vs_window(spec, hum, {task.window}, {cfg.sizes[task.size_index]}, cfg.grading);
    Partial p;
    for (const WindowRow& r : rows) {
      Row row = prefix(cfg, r.omega);
      extend(row, {count(r.n), count(r.m), hum.epsilon, r.control_cost, r.final_norm, r.j_value,
                   static_cast<long long>(r.cg_iterations)});
      p.rows.push_back(std::move(row));
    }
    return p;
  });
  return merge(with_prefix({"n", "m", "epsilon", "control_cost", "final_norm", "j_value", "cg_iterations"}),
               std::move(parts), json::object());
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, int jobs) {
  switch (cfg.kind) {
    case ExperimentKind::forward_convergence:
      return run_convergence(cfg);
    case ExperimentKind::carleman_sweep:
      return run_carleman(cfg, jobs);
    case ExperimentKind::observability:
      return run_observability(cfg, jobs);
    case ExperimentKind::hum:
      return run_hum(cfg, jobs);
    case ExperimentKind::weighted:
      return run_weighted(cfg, jobs);
    case ExperimentKind::semilinear:
      return run_semilinear(cfg, jobs);
    case ExperimentKind::nonlocal:
      return run_nonlocal(cfg, jobs);
    case ExperimentKind::window_study:
      return run_windows(cfg, jobs);
  }
  throw InvalidArgument("unknown experiment kind");
}

}  // namespace degenctrl::cli
