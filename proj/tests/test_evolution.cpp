#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "degenctrl/catalog.hpp"
#include "degenctrl/convergence.hpp"
#include "degenctrl/errors.hpp"
#include "degenctrl/evolution.hpp"

using namespace degenctrl;

namespace {

std::vector<double> random_profile(std::size_t size, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(size);
  for (double& x : v) x = normal(rng);
  v.back() = 0.0;
  return v;
}

Field random_field(const Grid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Field f(grid);
  for (double& x : f.values()) x = normal(rng);
  return f;
}

ProblemSpec base_spec(double alpha = 2.0, double horizon = 1.0) {
  ProblemSpec spec;
  spec.alpha = alpha;
  spec.horizon = horizon;
  spec.omega = {0.0, 0.3};
  return spec;
}

}  // namespace

TEST(ProblemSpecTest, Validation) {
  ProblemSpec spec = base_spec();
  EXPECT_NO_THROW(spec.validate());
  spec.alpha = 1.5;
  EXPECT_THROW(spec.validate(), InvalidArgument);
  spec = base_spec();
  spec.omega = {0.2, 0.5};
  EXPECT_THROW(spec.validate(), InvalidArgument);
  spec.geometric = false;
  EXPECT_NO_THROW(spec.validate());
  spec.horizon = 0.0;
  EXPECT_THROW(spec.validate(), InvalidArgument);
}

TEST(Assemble, ConstantsHaveNoFlux) {
  const SpaceMesh mesh = make_graded_mesh(20, 2.0);
  const DiscreteOperator op = assemble(base_spec(3.0), mesh, 0.0);
  EXPECT_EQ(op.left_flux_coefficient, 0.0);
  const std::vector<double> ones(mesh.size(), 1.0);
  const std::vector<double> au = op.apply(ones);
  for (std::size_t i = 0; i + 1 < mesh.size(); ++i) EXPECT_NEAR(au[i], 0.0, 1e-12);
}

TEST(Assemble, LinearProfileApproachesTwoX) {
  double previous = INFINITY;
  for (std::size_t n : {32, 64, 128, 256}) {
    const SpaceMesh mesh = make_graded_mesh(n, 2.0);
    std::vector<double> u(mesh.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0 - mesh.node(i);
    const std::vector<double> au = assemble(base_spec(), mesh, 0.0).apply(u);
    double error = 0.0;
    for (std::size_t i = 1; i + 1 < mesh.size(); ++i) error = std::max(error, std::abs(au[i] - 2.0 * mesh.node(i)));
    EXPECT_LT(error, previous);
    previous = error;
  }
  EXPECT_LT(previous, 1e-2);
}

TEST(Assemble, SymmetricWithoutLowerOrderTerms) {
  std::mt19937_64 rng(11);
  const SpaceMesh mesh = make_graded_mesh(30, 2.0);
  const DiscreteOperator op = assemble(base_spec(2.5), mesh, 0.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto u = random_profile(mesh.size(), rng);
    const auto w = random_profile(mesh.size(), rng);
    const double lhs = vol_dot(mesh, op.apply(u), w);
    const double rhs = vol_dot(mesh, u, op.apply(w));
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1.0 + std::abs(lhs)));
    EXPECT_GE(vol_dot(mesh, op.apply(u), u), -1e-12);
  }
}

TEST(Assemble, DirichletRowIsIdentity) {
  const SpaceMesh mesh = make_graded_mesh(8, 2.0);
  const DiscreteOperator op = assemble(base_spec(), mesh, 0.0);
  const std::size_t n = mesh.cells();
  EXPECT_EQ(op.matrix.diag[n], 1.0);
  EXPECT_EQ(op.matrix.lower[n], 0.0);
}

TEST(Thomas, MatchesDenseSolve) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const std::size_t n = 25;
  Tridiagonal t;
  t.lower.assign(n, 0.0);
  t.diag.assign(n, 0.0);
  t.upper.assign(n, 0.0);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) t.lower[i] = unif(rng);
    if (i + 1 < n) t.upper[i] = unif(rng);
    t.diag[i] = 3.0 + unif(rng);
    dense(i, i) = t.diag[i];
    if (i > 0) dense(i, i - 1) = t.lower[i];
    if (i + 1 < n) dense(i, i + 1) = t.upper[i];
  }
  Eigen::VectorXd b(n);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b(i) = unif(rng);
  TridiagonalSolver(t).solve(x);
  const Eigen::VectorXd ref = dense.partialPivLu().solve(b);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ref(i), 1e-13);
}

TEST(Thomas, ZeroPivotIsASolverFailure) {
  Tridiagonal t;
  t.lower = {0.0, 1.0};
  t.diag = {0.0, 1.0};
  t.upper = {1.0, 0.0};
  EXPECT_THROW({ TridiagonalSolver solver(t); }, SolverFailure);
}

TEST(Forward, ZeroDataGivesZero) {
  const Grid grid = make_grid(16, 2.0, 1.0, 10);
  const Field u = solve_forward(base_spec(), nullptr, grid);
  for (double v : u.values()) EXPECT_EQ(v, 0.0);
}

TEST(Forward, ManufacturedSolutionFirstOrderInTime) {
  ProblemSpec spec = base_spec();
  spec.u0 = [](double x) { return 1.0 - x; };
  spec.source = SourceMode::full_domain;
  const auto exact = [](double x, double t) { return std::exp(-t) * (1.0 - x); };
  double previous = 0.0;
  for (std::size_t m : {16, 32, 64}) {
    const Grid grid = make_grid(256, 2.0, 1.0, m);
    const Field f(grid, [](double x, double t) { return std::exp(-t) * (3.0 * x - 1.0); });
    const Field u = solve_forward(spec, &f, grid);
    const double error = l2_qt(u - Field(grid, exact));
    if (previous > 0.0) {
      EXPECT_NEAR(std::log2(previous / error), 1.0, 0.3) << "m=" << m;
    }
    previous = error;
  }
}

TEST(Forward, CatalogSourceMatchesSubstitution) {
  for (double alpha : {2.0, 3.0}) {
    for (double x : {0.0, 0.3, 0.9}) {
      const double t = 0.4;
      const double expected = -std::exp(-t) * (1.0 - x) + alpha * std::pow(x, alpha - 1.0) * std::exp(-t);
      EXPECT_NEAR(catalog::manufactured_source(alpha, x, t), expected, 1e-14);
    }
  }
}

TEST(Forward, ConvergenceOrders) {
  const auto rows = manufactured_convergence(2.0, 1.0, {64, 128, 256}, 2.0);
  for (const auto& r : rows) {
    if (r.order == 0.0) continue;
    const double expected = r.sweep == "time" ? 1.0 : 2.0;
    EXPECT_NEAR(r.order, expected, 0.4) << r.sweep << " n=" << r.n << " m=" << r.m;
  }
}

TEST(Forward, MaximumPrinciple) {
  ProblemSpec spec = base_spec(2.5);
  spec.b0 = [](double x, double t) { return 1.0 + x * t; };
  spec.u0 = [](double x) { return x * (1.0 - x); };
  spec.source = SourceMode::full_domain;
  const Grid grid = make_grid(40, 2.0, 1.0, 30);
  const Field f(grid, [](double x, double t) { return std::sin(3.0 * x + t) * std::sin(3.0 * x + t); });
  const Field u = solve_forward(spec, &f, grid);
  for (double v : u.values()) EXPECT_GE(v, 0.0);
}

TEST(Forward, ConstantReactionDampsByExponential) {
  ProblemSpec plain = base_spec();
  plain.u0 = [](double x) { return std::cos(0.5 * std::numbers::pi * x); };
  ProblemSpec damped = plain;
  const double c = 1.5;
  damped.b0 = [c](double, double) { return c; };
  double previous = INFINITY;
  for (std::size_t m : {20, 40, 80, 160}) {
    const Grid grid = make_grid(32, 2.0, 1.0, m);
    const Field u = solve_forward(plain, nullptr, grid);
    const Field w = solve_forward(damped, nullptr, grid);
    double error = 0.0;
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      error = std::max(error, std::abs(w(m, i) - std::exp(-c) * u(m, i)));
    }
    EXPECT_LT(error, previous);
    previous = error;
  }
  EXPECT_LT(previous, 5e-3);
}

TEST(Adjoint, ZeroDataGivesZero) {
  const Grid grid = make_grid(12, 2.0, 1.0, 9);
  const Field v = solve_adjoint(base_spec(), nullptr, std::vector<double>(grid.nodes(), 0.0), grid);
  for (double x : v.values()) EXPECT_EQ(x, 0.0);
}

TEST(Adjoint, DualityIdentityOnRandomData) {
  std::mt19937_64 rng(2024);
  ProblemSpec spec = base_spec(2.5);
  spec.b0 = catalog::coefficient("sin", 0.8);
  spec.b1 = catalog::coefficient("linear", 0.6);
  for (std::size_t size : {8, 20}) {
    const Grid grid = make_grid(size, 2.0, 0.7, size);
    const Evolution evo(spec, grid);
    for (int draw = 0; draw < 20; ++draw) {
      const auto u0 = random_profile(grid.nodes(), rng);
      const auto vt = random_profile(grid.nodes(), rng);
      const Field f = random_field(grid, rng);
      const Field h = random_field(grid, rng);
      const Field u = evo.forward(u0, &f);
      const Field v = evo.adjoint(vt, &h);
      const double lhs = vol_dot(*grid.mesh, u.level(size), vt) - vol_dot(*grid.mesh, u0, v.level(0));
      const double rhs = source_pairing(f, v) - observation_pairing(h, u);
      EXPECT_NEAR(lhs, rhs, 1e-10 * (1.0 + std::abs(lhs)));
    }
  }
}

TEST(Norms, Examples) {
  const SpaceMesh mesh = make_graded_mesh(200, 1.0);
  std::vector<double> zero(mesh.size(), 0.0);
  EXPECT_EQ(profile_norm(2.0, mesh, zero, NormKind::H2alpha), 0.0);
  std::vector<double> u(mesh.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0 - mesh.node(i);
  const double h1 = profile_norm(2.0, mesh, u, NormKind::H1alpha);
  EXPECT_NEAR(h1 * h1, 2.0 / 3.0, 1e-4);
}

TEST(Norms, Nesting) {
  std::mt19937_64 rng(9);
  const Grid grid = make_grid(30, 2.0, 1.0, 5);
  Field u = random_field(grid, rng);
  const double l2 = hs_norm(2.0, u, NormKind::L2);
  const double h1 = hs_norm(2.0, u, NormKind::H1alpha);
  const double h2 = hs_norm(2.0, u, NormKind::H2alpha);
  EXPECT_LE(l2, h1);
  EXPECT_LE(h1, h2);
}

TEST(Energy, ConstantStableUnderRefinement) {
  ProblemSpec spec = base_spec();
  spec.u0 = [](double x) { return 1.0 - x; };
  spec.source = SourceMode::full_domain;
  std::vector<double> constants;
  for (std::size_t n : {32, 64, 128, 256, 512}) {
    const Grid grid = make_grid(n, 2.0, 1.0, 64);
    const Field f(grid, [](double x, double t) { return std::sin(5.0 * x) * std::exp(-t); });
    const Field u = solve_forward(spec, &f, grid);
    const EnergyBalance e = energy_balance(2.0, u, &f);
    constants.push_back(e.lhs / e.rhs);
  }
  for (std::size_t i = 1; i < constants.size(); ++i) {
    const double ratio = constants[i - 1] / constants[i];
    EXPECT_GE(ratio, 0.5);
    EXPECT_LE(ratio, 2.0);
  }
}

TEST(Stepping, StepMatrixMatchesEvolution) {
  ProblemSpec spec = base_spec();
  spec.u0 = [](double x) { return 1.0 - x * x; };
  const Grid grid = make_grid(16, 2.0, 1.0, 4);
  const Field u = solve_forward(spec, nullptr, grid);
  std::vector<double> state = sample_initial(spec, *grid.mesh);
  const DiscreteOperator op = assemble(spec, *grid.mesh, 0.0);
  for (std::size_t k = 1; k <= 4; ++k) {
    implicit_euler_step(op, grid.time.dt(), state);
    for (std::size_t i = 0; i < grid.nodes(); ++i) EXPECT_NEAR(state[i], u(k, i), 1e-15);
  }
}
