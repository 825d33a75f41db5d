#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "degenctrl/carleman.hpp"
#include "degenctrl/errors.hpp"
#include "degenctrl/hum.hpp"

using namespace degenctrl;

namespace {

ProblemSpec hum_spec(double alpha = 2.0) {
  ProblemSpec spec;
  spec.alpha = alpha;
  spec.horizon = 0.5;
  spec.omega = {0.0, 0.3};
  spec.u0 = [](double x) { return 1.0 - x; };
  return spec;
}

// Gramian in the cell-volume inner product over the free nodes 0..n-1.
Eigen::MatrixXd assemble_gramian(const HumSolver& solver) {
  const SpaceMesh& mesh = *solver.evolution().grid().mesh;
  const std::size_t n = mesh.cells();
  Eigen::MatrixXd g(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(mesh.size(), 0.0);
    e[j] = 1.0;
    const std::vector<double> col = solver.gramian_apply(e);
    for (std::size_t i = 0; i < n; ++i) g(i, j) = mesh.volume(i) * col[i];
  }
  return g;
}

double free_final_norm(const ProblemSpec& spec, const Grid& grid) {
  const Field u = solve_forward(spec, nullptr, grid);
  return vol_norm(*grid.mesh, u.level(grid.time.steps()));
}

}  // namespace

TEST(Gramian, ZeroInZeroOut) {
  const Grid grid = make_grid(16, 2.0, 0.5, 16);
  const std::vector<double> zero(grid.nodes(), 0.0);
  for (double v : gramian_apply(hum_spec(), zero, grid)) EXPECT_EQ(v, 0.0);
}

TEST(Gramian, SymmetricPositiveSemidefinite) {
  for (double alpha : {2.0, 3.0}) {
    const HumSolver solver(hum_spec(alpha), make_grid(16, 2.0, 0.5, 16));
    const Eigen::MatrixXd g = assemble_gramian(solver);
    const double asymmetry = (g - g.transpose()).cwiseAbs().maxCoeff();
    EXPECT_LE(asymmetry, 1e-10);
    const Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff();
    EXPECT_GE(min_eig, -1e-12);
  }
}

TEST(Gramian, LinearInTerminalData) {
  const Grid grid = make_grid(24, 2.0, 0.5, 24);
  const HumSolver solver(hum_spec(), grid);
  const auto a = random_terminal(*grid.mesh, 1);
  const auto b = random_terminal(*grid.mesh, 2);
  std::vector<double> sum(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) sum[i] = 2.0 * a[i] - b[i];
  const auto ga = solver.gramian_apply(a);
  const auto gb = solver.gramian_apply(b);
  const auto gs = solver.gramian_apply(sum);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(gs[i], 2.0 * ga[i] - gb[i], 1e-13);
}

TEST(Hum, ZeroInitialDataNeedsNoControl) {
  ProblemSpec spec = hum_spec();
  spec.u0 = [](double) { return 0.0; };
  const Grid grid = make_grid(32, 2.0, 0.5, 32);
  const ControlResult r = solve_hum(spec, sample_initial(spec, *grid.mesh), {}, grid);
  EXPECT_EQ(r.control_cost, 0.0);
  EXPECT_EQ(r.final_norm, 0.0);
  EXPECT_EQ(r.j_value, 0.0);
  EXPECT_TRUE(r.converged);
  for (double v : r.control.values()) EXPECT_EQ(v, 0.0);
}

TEST(Hum, HugePenaltyWeightLeavesStateFree) {
  const ProblemSpec spec = hum_spec();
  const Grid grid = make_grid(32, 2.0, 0.5, 32);
  HumConfig cfg;
  cfg.epsilon = 1e6;
  const ControlResult r = solve_hum(spec, sample_initial(spec, *grid.mesh), cfg, grid);
  EXPECT_NEAR(r.final_norm, r.free_final_norm, 1e-5 * r.free_final_norm);
  EXPECT_NEAR(r.free_final_norm, free_final_norm(spec, grid), 1e-14);
}

TEST(Hum, FunctionalIdentityAndBounds) {
  const ProblemSpec spec = hum_spec();
  const Grid grid = make_grid(64, 2.0, 0.5, 64);
  for (double eps : {1e-2, 1e-4}) {
    HumConfig cfg;
    cfg.epsilon = eps;
    const ControlResult r = solve_hum(spec, sample_initial(spec, *grid.mesh), cfg, grid);
    ASSERT_TRUE(r.converged);
    const double j = 0.5 * r.control_cost + r.final_norm * r.final_norm / (2.0 * eps);
    EXPECT_NEAR(r.j_value, j, 1e-12 * j);
    const double j_free = r.free_final_norm * r.free_final_norm / (2.0 * eps);
    EXPECT_LE(r.j_value, j_free);
    EXPECT_LE(r.control_cost, r.free_final_norm * r.free_final_norm / eps);
    EXPECT_LT(r.optimality_residual, 1e-6);
    EXPECT_DOUBLE_EQ(r.control_cost, HumSolver(spec, grid).control_cost(r.control));
    EXPECT_NEAR(r.final_norm, vol_norm(*grid.mesh, r.state.level(grid.time.steps())), 1e-14);
  }
}

TEST(Hum, StateIsDrivenByTheControl) {
  ProblemSpec spec = hum_spec();
  const Grid grid = make_grid(32, 2.0, 0.5, 32);
  const HumSolver solver(spec, grid);
  const ControlResult r = solver.solve(sample_initial(spec, *grid.mesh), {});
  spec.source = SourceMode::control_on_omega;
  const Field replay = solve_forward(spec, &r.control, grid);
  for (std::size_t k = 0; k < grid.levels(); ++k)
    for (std::size_t i = 0; i < grid.nodes(); ++i) EXPECT_NEAR(replay(k, i), r.state(k, i), 1e-13);
}

TEST(Hum, ConjugateGradientFinishesWithinDimension) {
  const ProblemSpec spec = hum_spec();
  for (std::size_t n : {4, 8}) {
    const Grid grid = make_grid(n, 2.0, 0.5, 8);
    HumConfig cfg;
    cfg.epsilon = 1e-2;
    const ControlResult r = solve_hum(spec, sample_initial(spec, *grid.mesh), cfg, grid);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.cg_iterations, static_cast<int>(n) + 1);
  }
}

TEST(Hum, FinalNormDecreasesWithPenalty) {
  for (double alpha : {2.0, 3.0}) {
    const ProblemSpec spec = hum_spec(alpha);
    const Grid grid = make_grid(64, 2.0, 0.5, 64);
    const HumSolver solver(spec, grid);
    const auto u0 = sample_initial(spec, *grid.mesh);
    double previous = INFINITY;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
      HumConfig cfg;
      cfg.epsilon = eps;
      const ControlResult r = solver.solve(u0, cfg);
      EXPECT_LT(r.final_norm, previous) << "alpha=" << alpha << " eps=" << eps;
      previous = r.final_norm;
    }
  }
}

TEST(Hum, ConfigValidation) {
  HumConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.cg_tol = 1.5;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.cg_maxit = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(Hum, MaskMatchesWindow) {
  const Grid grid = make_grid(10, 1.0, 0.5, 4);
  const HumSolver solver(hum_spec(), grid);
  EXPECT_EQ(solver.mask(), omega_mask(*grid.mesh, {0.0, 0.3}));
}

TEST(Windows, WholeDomainIsCheapestInTheFunctional) {
  HumConfig cfg;
  cfg.epsilon = 1e-4;
  const auto rows = control_cost_vs_window(hum_spec(), cfg, {{0.0, 1.0}, {0.0, 0.3}, {0.5, 0.8}}, {32}, 2.0);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_LE(rows[0].j_value, rows[1].j_value);
  EXPECT_LE(rows[0].j_value, rows[2].j_value);
}

TEST(Windows, EmptyWindowListGivesEmptyTable) {
  EXPECT_TRUE(control_cost_vs_window(hum_spec(), {}, {}, {32, 64}, 2.0).empty());
}

TEST(Windows, DeterministicRows) {
  HumConfig cfg;
  cfg.epsilon = 1e-3;
  const auto a = control_cost_vs_window(hum_spec(), cfg, {{0.5, 0.8}}, {16, 32}, 2.0);
  const auto b = control_cost_vs_window(hum_spec(), cfg, {{0.5, 0.8}}, {16, 32}, 2.0);
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].control_cost, b[i].control_cost);
    EXPECT_EQ(a[i].n, b[i].n);
  }
  EXPECT_EQ(a[1].n, 32u);
}

TEST(Windows, RejectsInvalidWindow) {
  EXPECT_THROW(control_cost_vs_window(hum_spec(), {}, {{0.5, 0.2}}, {8}, 2.0), InvalidArgument);
}
