#include "degenctrl/convergence.hpp"

#include <cmath>

#include "degenctrl/catalog.hpp"
#include "degenctrl/errors.hpp"
#include "degenctrl/evolution.hpp"

namespace degenctrl {

namespace {

std::vector<double> terminal_state(double alpha, double horizon, std::size_t n, std::size_t m, double grading) {
  const Grid grid = make_grid(n, grading, horizon, m);
  const Field source(grid, [alpha](double x, double t) { return catalog::manufactured_source(alpha, x, t); });
  std::vector<double> u0(grid.nodes());
  for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = catalog::manufactured_solution(grid.mesh->node(i), 0.0);
  const Field u = Evolution(alpha, grid, Coefficients::zero(grid)).forward(u0, &source);
  const auto last = u.level(m);
  return {last.begin(), last.end()};
}

}  // namespace

std::vector<ConvergenceRow> manufactured_convergence(double alpha, double horizon,
                                                     const std::vector<std::size_t>& sizes, double grading) {
  if (sizes.size() < 2) throw InvalidArgument("convergence study needs at least two sizes");
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    if (sizes[k] != 2 * sizes[k - 1]) throw InvalidArgument("convergence sizes must double");
  }
  std::vector<ConvergenceRow> rows;

  const std::size_t n_fine = sizes.back();
  const SpaceMesh fine = make_graded_mesh(n_fine, grading);
  std::vector<double> exact(fine.size());
  for (std::size_t i = 0; i < exact.size(); ++i) exact[i] = catalog::manufactured_solution(fine.node(i), horizon);
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::vector<double> u = terminal_state(alpha, horizon, n_fine, sizes[k], grading);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] -= exact[i];
    ConvergenceRow row{"time", n_fine, sizes[k], vol_norm(fine, u), 0.0};
    if (k > 0) row.order = std::log2(rows.back().error / row.error);
    rows.push_back(row);
  }

  const std::size_t m = sizes.front();
  std::vector<double> coarse = terminal_state(alpha, horizon, sizes.front(), m, grading);
  const std::size_t first_space = rows.size();
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const std::size_t n = sizes[k];
    std::vector<double> finer = terminal_state(alpha, horizon, 2 * n, m, grading);
    std::vector<double> diff(n + 1);
    for (std::size_t i = 0; i <= n; ++i) diff[i] = coarse[i] - finer[2 * i];
    ConvergenceRow row{"space", n, m, vol_norm(make_graded_mesh(n, grading), diff), 0.0};
    if (rows.size() > first_space) row.order = std::log2(rows.back().error / row.error);
    rows.push_back(row);
    coarse = std::move(finer);
  }
  return rows;
}

}  // namespace degenctrl
