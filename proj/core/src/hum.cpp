#include "degenctrl/hum.hpp"

#include <cmath>

#include "degenctrl/cg.hpp"
#include "degenctrl/errors.hpp"

namespace degenctrl {

void HumConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (!(cg_tol > 0.0 && cg_tol < 1.0)) throw InvalidArgument("cg_tol must lie in (0, 1)");
  if (cg_maxit <= 0) throw InvalidArgument("cg_maxit must be positive");
}

HumSolver::HumSolver(Evolution evolution, Interval omega)
    : evolution_(std::move(evolution)), omega_(omega), mask_(omega_mask(*evolution_.grid().mesh, omega)) {}

HumSolver::HumSolver(const ProblemSpec& spec, const Grid& grid) : HumSolver(Evolution(spec, grid), spec.omega) {
  spec.validate();
}

Field HumSolver::control_from_adjoint(const Field& adjoint) const {
  Field h(evolution_.grid());
  for (std::size_t k = 1; k < h.levels(); ++k) {
    for (std::size_t i = 0; i < h.nodes(); ++i) {
      if (mask_[i] > 0.0) h(k, i) = -adjoint(k - 1, i);
    }
  }
  return h;
}

Field HumSolver::source_of(const Field& control) const {
  Field f = control;
  for (std::size_t k = 0; k < f.levels(); ++k) {
    auto row = f.level(k);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] *= mask_[i];
  }
  return f;
}

double HumSolver::control_cost(const Field& control) const {
  const SpaceMesh& mesh = control.mesh();
  double sum = 0.0;
  for (std::size_t k = 1; k < control.levels(); ++k) {
    for (std::size_t i = 0; i < control.nodes(); ++i) {
      sum += mesh.volume(i) * mask_[i] * control(k, i) * control(k, i);
    }
  }
  return control.time().dt() * sum;
}

std::vector<double> HumSolver::gramian_apply(std::span<const double> terminal) const {
  const Field v = evolution_.adjoint(terminal);
  Field f(evolution_.grid());
  for (std::size_t k = 1; k < f.levels(); ++k) {
    for (std::size_t i = 0; i < f.nodes(); ++i) f(k, i) = mask_[i] * v(k - 1, i);
  }
  const std::vector<double> zero(f.nodes(), 0.0);
  const Field u = evolution_.forward(zero, &f);
  const auto last = u.level(u.levels() - 1);
  return {last.begin(), last.end()};
}

ControlResult HumSolver::solve(std::span<const double> u0, const HumConfig& cfg) const {
  cfg.validate();
  const Grid& grid = evolution_.grid();
  const SpaceMesh& mesh = *grid.mesh;
  const std::size_t last = grid.time.steps();

  const Field free = evolution_.forward(u0);
  const std::vector<double> rhs(free.level(last).begin(), free.level(last).end());

  const auto dot = [&mesh](const Vector& a, const Vector& b) { return vol_dot(mesh, a, b); };
  const auto apply = [&](const Vector& phi) {
    Vector out = gramian_apply(phi);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += cfg.epsilon * phi[i];
    out.back() = 0.0;
    return out;
  };

  Vector phi(rhs.size(), 0.0);
  const CgOutcome cg = conjugate_gradient(apply, rhs, phi, dot, cfg.cg_tol, cfg.cg_maxit);

  ControlResult result(grid);
  result.epsilon = cfg.epsilon;
  result.cg_iterations = cg.iterations;
  result.cg_residual = cg.residual;
  result.converged = cg.converged;
  if (!cg.converged) result.warnings.emplace_back("CG did not reach tolerance; returning best iterate");

  const Field adjoint = evolution_.adjoint(phi);
  result.control = control_from_adjoint(adjoint);
  const Field source = source_of(result.control);
  result.state = evolution_.forward(u0, &source);

  const auto u_final = result.state.level(last);
  result.final_norm = vol_norm(mesh, u_final);
  result.free_final_norm = vol_norm(mesh, rhs);
  result.control_cost = control_cost(result.control);
  result.j_value = 0.5 * result.control_cost + result.final_norm * result.final_norm / (2.0 * cfg.epsilon);

  // Optimality: h = -phi 1_omega with phi the adjoint from u(T) / epsilon.
  std::vector<double> scaled(u_final.begin(), u_final.end());
  for (double& s : scaled) s /= cfg.epsilon;
  const Field phi_eps = evolution_.adjoint(scaled);
  const Field h_star = control_from_adjoint(phi_eps);
  const double h_norm = std::sqrt(result.control_cost);
  const double diff = std::sqrt(control_cost(result.control - h_star));
  result.optimality_residual = h_norm > 0.0 ? diff / h_norm : diff;

  const double j_zero = result.free_final_norm * result.free_final_norm / (2.0 * cfg.epsilon);
  if (result.j_value > j_zero * (1.0 + 1e-12)) result.warnings.emplace_back("J(h) exceeds J(0)");
  return result;
}

std::vector<double> gramian_apply(const ProblemSpec& spec, std::span<const double> terminal, const Grid& grid) {
  return HumSolver(spec, grid).gramian_apply(terminal);
}

ControlResult solve_hum(const ProblemSpec& spec, std::span<const double> u0, const HumConfig& cfg,
                        const Grid& grid) {
  return HumSolver(spec, grid).solve(u0, cfg);
}

std::vector<WindowRow> control_cost_vs_window(const ProblemSpec& spec, const HumConfig& cfg,
                                              const std::vector<Interval>& windows,
                                              const std::vector<std::size_t>& sizes, double grading) {
  std::vector<WindowRow> rows;
  for (const Interval& omega : windows) {
    validate_interval(omega);
    ProblemSpec local = spec;
    local.omega = omega;
    local.geometric = false;
    for (std::size_t n : sizes) {
      const Grid grid = make_grid(n, grading, spec.horizon, n);
      const std::vector<double> u0 = sample_initial(local, *grid.mesh);
      const ControlResult r = solve_hum(local, u0, cfg, grid);
      rows.push_back({omega, n, n, r.control_cost, r.final_norm, r.j_value, r.cg_iterations});
    }
  }
  return rows;
}

}  // namespace degenctrl
