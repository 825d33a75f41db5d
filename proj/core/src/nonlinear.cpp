#include "degenctrl/nonlinear.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace degenctrl {

namespace {

struct GaussNode {
  double mu;
  double weight;
};

// 8-point Gauss-Legendre rule mapped to [0, 1].
const std::array<GaussNode, 8>& gauss_legendre8() {
  static const std::array<GaussNode, 8> rule = [] {
    constexpr std::array<double, 4> z{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                      0.9602898564975363};
    constexpr std::array<double, 4> w{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                      0.1012285362903763};
    std::array<GaussNode, 8> r{};
    for (std::size_t k = 0; k < 4; ++k) {
      r[2 * k] = {0.5 * (1.0 - z[k]), 0.5 * w[k]};
      r[2 * k + 1] = {0.5 * (1.0 + z[k]), 0.5 * w[k]};
    }
    return r;
  }();
  return rule;
}

struct PointwiseCoefficients {
  std::vector<double> reaction;
  std::vector<double> drift;
};

PointwiseCoefficients linearize_level(const SemilinearSpec& spec, const SpaceMesh& mesh, double t,
                                      std::span<const double> w) {
  const std::vector<double> q = nodal_gradient(mesh, w);
  PointwiseCoefficients c{std::vector<double>(w.size(), 0.0), std::vector<double>(w.size(), 0.0)};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = mesh.node(i);
    for (const GaussNode& g : gauss_legendre8()) {
      c.reaction[i] += g.weight * spec.g_r(x, t, g.mu * w[i], g.mu * q[i]);
      c.drift[i] += g.weight * spec.g_q(x, t, g.mu * w[i], g.mu * q[i]);
    }
  }
  return c;
}

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_stagnation(const IterationTrace& trace, int& non_decreasing) {
  const auto& r = trace.records;
  if (r.size() < 2) return;
  non_decreasing = r.back().distance >= r[r.size() - 2].distance ? non_decreasing + 1 : 0;
  if (non_decreasing >= 5) {
    throw IterationFailure(IterationFailureKind::stagnation,
                           "Picard iteration stagnated: distance non-decreasing for 5 iterations", trace);
  }
}

// theta = 1 keeps the candidate bit for bit.
Field relax(const Field& previous, const Field& candidate, double theta) {
  if (theta == 1.0) return candidate;
  return theta * candidate + (1.0 - theta) * previous;
}

}  // namespace

void SemilinearSpec::validate(const Grid& grid, unsigned seed, int samples) const {
  if (!(lipschitz >= 0.0)) throw InvalidArgument("Lipschitz constant must be nonnegative");
  const SpaceMesh& mesh = *grid.mesh;
  for (std::size_t k = 0; k < grid.levels(); ++k) {
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      if (g(mesh.node(i), grid.time.instant(k), 0.0, 0.0) != 0.0) {
        throw InvalidArgument("g(x, t, 0, 0) must vanish");
      }
    }
  }
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  const double T = grid.time.end();
  for (int s = 0; s < samples; ++s) {
    const double x = unit(rng);
    const double t = T * unit(rng);
    const double r = value(rng);
    const double q = value(rng);
    const double h = 1e-5;
    const double fd_r = (g(x, t, r + h, q) - g(x, t, r - h, q)) / (2.0 * h);
    const double fd_q = (g(x, t, r, q + h) - g(x, t, r, q - h)) / (2.0 * h);
    const double gr = g_r(x, t, r, q);
    const double gq = g_q(x, t, r, q);
    if (std::abs(fd_r - gr) > 1e-6 * (1.0 + std::abs(gr)) || std::abs(fd_q - gq) > 1e-6 * (1.0 + std::abs(gq))) {
      throw InvalidArgument("supplied partial derivatives of g disagree with finite differences");
    }
  }
}

void NonlocalSpec::validate() const {
  if (std::abs(ell(0.0) - 1.0) > 1e-12) throw InvalidArgument("ell(0) must equal 1");
  if (!(lipschitz >= 0.0)) throw InvalidArgument("Lipschitz constant must be nonnegative");
}

Linearization linearize_g(const SemilinearSpec& spec, double alpha, const Field& w) {
  const Grid& grid = w.grid();
  const SpaceMesh& mesh = *grid.mesh;
  Linearization lin{Field(grid), Field(grid), Field(grid)};
  const double tolerance = 1e-6 * (1.0 + sup_abs(w.values()));

  for (std::size_t k = 0; k < w.levels(); ++k) {
    const double t = grid.time.instant(k);
    const auto level = w.level(k);
    const PointwiseCoefficients c = linearize_level(spec, mesh, t, level);
    const std::vector<double> q = nodal_gradient(mesh, level);
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      const double x = mesh.node(i);
      lin.b0(k, i) = c.reaction[i];
      lin.drift(k, i) = c.drift[i];
      if (x > 0.0) {
        lin.b1(k, i) = c.drift[i] / std::pow(x, 0.5 * alpha);
      } else if (c.drift[i] != 0.0) {
        throw NumericalDomainError("g_q does not vanish at x = 0");
      }
      const double defect = std::abs(spec.g(x, t, level[i], q[i]) - c.reaction[i] * level[i] - c.drift[i] * q[i]);
      lin.reconstruction_defect = std::max(lin.reconstruction_defect, defect);
    }
    if (mesh.node(0) == 0.0 && mesh.size() > 1) lin.b1(k, 0) = lin.b1(k, 1);
  }
  if (lin.reconstruction_defect > tolerance) {
    throw QuadratureFailure("reconstruction defect " + std::to_string(lin.reconstruction_defect) +
                            " exceeds quadrature tolerance");
  }
  lin.coefficient_bound = sup_abs(lin.b0.values()) + sup_abs(lin.b1.values());
  if (lin.coefficient_bound > 2.0 * spec.lipschitz * (1.0 + 1e-12)) {
    throw InvalidArgument("coefficient bound ||b0|| + ||b1|| exceeds 2K");
  }
  return lin;
}

SemilinearResult solve_semilinear_control(const ProblemSpec& problem, const SemilinearSpec& spec,
                                          std::span<const double> u0, const HumConfig& hum, const Grid& grid,
                                          const PicardConfig& picard) {
  problem.validate();
  hum.validate();
  const std::size_t m = grid.time.steps();
  if (m % 4 != 0) throw InvalidArgument("the number of time steps must be divisible by 4");
  if (u0.size() != grid.nodes()) throw InvalidArgument("initial datum has the wrong length");
  spec.validate(grid);

  const SpaceMesh& mesh = *grid.mesh;
  const double alpha = problem.alpha;
  const double dt = grid.time.dt();
  const std::size_t split = m / 4;

  // Phase 1: uncontrolled semilinear evolution.
  const Grid free_grid{grid.mesh, TimeGrid(grid.time.start(), grid.time.instant(split), split)};
  Field free(free_grid);
  std::copy(u0.begin(), u0.end(), free.level(0).begin());
  free(0, mesh.size() - 1) = 0.0;
  for (std::size_t k = 1; k <= split; ++k) {
    const auto prev = free.level(k - 1);
    std::vector<double> current(prev.begin(), prev.end());
    bool settled = false;
    for (int inner = 0; inner < 200 && !settled; ++inner) {
      const PointwiseCoefficients c = linearize_level(spec, mesh, grid.time.instant(k), current);
      std::vector<double> next(prev.begin(), prev.end());
      implicit_euler_step(assemble(alpha, mesh, c.reaction, c.drift), dt, next);
      double change = 0.0;
      for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - current[i]));
      current = std::move(next);
      settled = change <= 1e-13 * (1.0 + sup_abs(current));
    }
    if (!settled) throw SolverFailure("inner Picard iteration of the free phase did not settle");
    std::copy(current.begin(), current.end(), free.level(k).begin());
  }
  const auto start = free.level(split);
  const std::vector<double> u1(start.begin(), start.end());

  // Phase 2: Picard over linearized HUM solves.
  const Grid sub{grid.mesh, TimeGrid(grid.time.instant(split), grid.time.end(), m - split)};
  const auto controlled = [&](const Linearization& lin) {
    return HumSolver(Evolution(alpha, sub, Coefficients{lin.b0, lin.drift}), problem.omega).solve(u1, hum);
  };

  IterationTrace trace;
  Linearization lin = linearize_g(spec, alpha, Field(sub));
  ControlResult res = controlled(lin);
  Field w = res.state;
  trace.records.push_back({0, lin.coefficient_bound, res.control_cost, res.final_norm, l2_qt(w), 1.0});

  double theta = picard.damping;
  int non_decreasing = 0;
  for (int it = 1; it <= picard.max_iterations; ++it) {
    lin = linearize_g(spec, alpha, w);
    res = controlled(lin);
    Field next = relax(w, res.state, theta);
    const double distance = l2_qt(next - w);
    trace.records.push_back({it, lin.coefficient_bound, res.control_cost, res.final_norm, distance, theta});
    trace.iterations = it;
    w = std::move(next);
    if (distance == 0.0 || distance <= picard.tol * l2_qt(w)) {
      trace.converged = true;
      break;
    }
    const auto& r = trace.records;
    if (r.size() > 2 && distance > r[r.size() - 2].distance && theta != picard.fallback_damping) {
      theta = picard.fallback_damping;
    }
    check_stagnation(trace, non_decreasing);
  }
  if (!trace.converged) {
    throw IterationFailure(IterationFailureKind::stagnation, "Picard iteration did not reach tolerance", trace);
  }

  SemilinearResult out{ControlResult(grid), trace, split, free};
  ControlResult& full = out.control;
  for (std::size_t k = 0; k <= split; ++k) {
    std::copy(free.level(k).begin(), free.level(k).end(), full.state.level(k).begin());
  }
  for (std::size_t k = 1; k <= m - split; ++k) {
    std::copy(res.state.level(k).begin(), res.state.level(k).end(), full.state.level(split + k).begin());
    std::copy(res.control.level(k).begin(), res.control.level(k).end(), full.control.level(split + k).begin());
  }
  full.final_norm = res.final_norm;
  full.free_final_norm = res.free_final_norm;
  full.control_cost = res.control_cost;
  full.j_value = res.j_value;
  full.epsilon = res.epsilon;
  full.cg_iterations = res.cg_iterations;
  full.cg_residual = res.cg_residual;
  full.optimality_residual = res.optimality_residual;
  full.converged = res.converged;
  full.warnings = res.warnings;
  return out;
}

Field nonlocal_source(const NonlocalSpec& spec, double alpha, const Field& u) {
  const SpaceMesh& mesh = u.mesh();
  const std::vector<double> ones(mesh.size(), 1.0);
  Field g(u.grid());
  for (std::size_t k = 0; k < u.levels(); ++k) {
    const double factor = spec.ell(vol_dot(mesh, u.level(k), ones)) - 1.0;
    if (factor == 0.0) continue;
    const std::vector<double> div = flux_divergence(alpha, mesh, u.level(k));
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i) g(k, i) = factor * div[i];
  }
  return g;
}

NonlocalResult solve_nonlocal_control(const ProblemSpec& problem, const NonlocalSpec& spec,
                                      std::span<const double> u0, const Grid& grid, const NonlocalConfig& cfg) {
  spec.validate();
  if (u0.size() != grid.nodes()) throw InvalidArgument("initial datum has the wrong length");
  const SpaceMesh& mesh = *grid.mesh;
  const double alpha = problem.alpha;
  const std::vector<double> ones(mesh.size(), 1.0);

  IterationTrace trace;
  const double data_norm = profile_norm(alpha, mesh, u0, NormKind::H1alpha);
  if (data_norm > cfg.radius) {
    throw IterationFailure(IterationFailureKind::local_radius_exceeded,
                           "initial datum exceeds the local radius; try smaller data", trace);
  }

  const WeightedController controller(problem, grid, cfg.weighted);
  const auto rho1_norm = [&](const Field& f) {
    return std::sqrt(weighted_norm_sq(right_values(f), controller.weights(), 1));
  };
  const auto ell_gap = [&](const Field& u) {
    double gap = 0.0;
    for (std::size_t k = 0; k < u.levels(); ++k) {
      gap = std::max(gap, std::abs(spec.ell(vol_dot(mesh, u.level(k), ones)) - 1.0));
    }
    return gap;
  };
  const auto all_zero = [](const Field& f) {
    return std::all_of(f.values().begin(), f.values().end(), [](double v) { return v == 0.0; });
  };

  WeightedControlResult res = controller.solve(u0, nullptr);
  Field u = res.state;
  trace.records.push_back({0, 0.0, res.f_rho3_sq, res.final_norm, rho1_norm(u), 1.0});

  const PicardConfig& picard = cfg.picard;
  double theta = picard.damping;
  int non_decreasing = 0;
  for (int it = 1; it <= picard.max_iterations; ++it) {
    const Field g = nonlocal_source(spec, alpha, u);
    res = all_zero(g) ? controller.solve(u0, nullptr) : controller.solve(u0, &g);
    Field next = relax(u, res.state, theta);
    const double distance = rho1_norm(next - u);
    trace.records.push_back({it, ell_gap(u), res.f_rho3_sq, res.final_norm, distance, theta});
    trace.iterations = it;
    u = std::move(next);
    if (distance == 0.0 || distance <= picard.tol * rho1_norm(u)) {
      trace.converged = true;
      break;
    }
    const auto& r = trace.records;
    if (r.size() >= 4 && distance >= 2.0 * r[r.size() - 4].distance) {
      throw IterationFailure(IterationFailureKind::local_radius_exceeded,
                             "iterate distance doubled over three iterations; the datum is likely outside the "
                             "local radius, try smaller data",
                             trace);
    }
    if (r.size() > 2 && distance > r[r.size() - 2].distance && theta != picard.fallback_damping) {
      theta = picard.fallback_damping;
    }
    check_stagnation(trace, non_decreasing);
  }
  if (!trace.converged) {
    throw IterationFailure(IterationFailureKind::stagnation, "nonlocal iteration did not reach tolerance", trace);
  }

  NonlocalResult out{res, trace, 0.0};
  const Field& state = res.state;
  const std::vector<double>& mask = controller.mask();
  IntervalField residual = time_difference(state);
  for (std::size_t j = 1; j <= residual.intervals(); ++j) {
    const double ell = spec.ell(vol_dot(mesh, state.level(j), ones));
    const std::vector<double> div = flux_divergence(alpha, mesh, state.level(j));
    for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
      residual(j, i) -= ell * div[i] + mask[i] * res.control(j, i);
    }
    residual(j, mesh.size() - 1) = 0.0;
  }
  const double u_norm = std::sqrt(res.u_rho1_sq);
  const double r_norm = std::sqrt(weighted_norm_sq(residual, controller.weights(), 1));
  out.nonlinear_residual = u_norm > 0.0 ? r_norm / u_norm : r_norm;
  return out;
}

}  // namespace degenctrl
