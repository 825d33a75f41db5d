#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "degenctrl/carleman.hpp"
#include "degenctrl/errors.hpp"
#include "degenctrl/weighted_control.hpp"

using namespace degenctrl;

namespace {

ProblemSpec weighted_spec() {
  ProblemSpec spec;
  spec.alpha = 2.0;
  spec.horizon = 0.5;
  spec.omega = {0.0, 0.3};
  spec.u0 = [](double x) { return 1.0 - x; };
  return spec;
}

Field noise_field(const Grid& grid, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Field f(grid);
  for (double& v : f.values()) v = normal(rng);
  return f;
}

std::vector<Probe> random_probes(const Grid& grid, int count, std::uint64_t seed) {
  std::vector<Probe> probes;
  for (int p = 0; p < count; ++p) {
    probes.push_back({noise_field(grid, seed + 2 * p, 1.0), random_terminal(*grid.mesh, seed + 2 * p + 1)});
  }
  return probes;
}

Field full_source(const WeightedControlResult& r, const std::vector<double>& mask) {
  Field source = r.source;
  for (std::size_t k = 0; k < source.levels(); ++k)
    for (std::size_t i = 0; i < source.nodes(); ++i) source(k, i) += mask[i] * r.control(k, i);
  return source;
}

WeightedControlConfig quick_config() {
  WeightedControlConfig cfg;
  cfg.cg_tol = 1e-9;
  return cfg;
}

}  // namespace

TEST(Transposition, ExactForDiscreteSolutions) {
  const Grid grid = make_grid(32, 2.0, 0.5, 32);
  const ProblemSpec spec = weighted_spec();
  const WeightedController controller(spec, grid, quick_config());
  const Field g = noise_field(grid, 3, 0.1);
  const WeightedControlResult r = controller.solve(sample_initial(spec, *grid.mesh), &g);
  const double defect = transposition_check(controller.evolution(), r.state, full_source(r, controller.mask()), r.u0,
                                            random_probes(grid, 10, 50));
  EXPECT_LE(defect, 1e-9);
}

TEST(Transposition, DetectsPerturbedStates) {
  const Grid grid = make_grid(32, 2.0, 0.5, 32);
  const ProblemSpec spec = weighted_spec();
  const Evolution evolution(spec, grid);
  const auto u0 = sample_initial(spec, *grid.mesh);
  const Field zero(grid);
  Field u = evolution.forward(u0);
  u += noise_field(grid, 8, 1e-3);
  EXPECT_GE(transposition_check(evolution, u, zero, u0, random_probes(grid, 10, 90)), 1e-5);
}

TEST(Transposition, ZeroEverythingIsZero) {
  const Grid grid = make_grid(16, 2.0, 0.5, 16);
  const Evolution evolution(weighted_spec(), grid);
  const Field zero(grid);
  const std::vector<double> u0(grid.nodes(), 0.0);
  EXPECT_EQ(transposition_check(evolution, zero, zero, u0, random_probes(grid, 3, 1)), 0.0);
}

TEST(WeightedControl, ZeroDataGivesZeroControl) {
  const Grid grid = make_grid(32, 2.0, 0.5, 32);
  const WeightedController controller(weighted_spec(), grid, quick_config());
  const WeightedControlResult r = controller.solve(std::vector<double>(grid.nodes(), 0.0), nullptr);
  for (double v : r.control.values()) EXPECT_EQ(v, 0.0);
  for (double v : r.state.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.objective, 0.0);
  EXPECT_EQ(r.e_norm_sq, 0.0);
  const EstimateReport e = additional_estimates(r, controller);
  EXPECT_EQ(e.lhs, 0.0);
  EXPECT_EQ(e.rhs, 0.0);
}

TEST(WeightedControl, ENormIsSumOfItsParts) {
  const Grid grid = make_grid(48, 2.0, 0.5, 48);
  const ProblemSpec spec = weighted_spec();
  const WeightedController controller(spec, grid, quick_config());
  Field g = noise_field(grid, 12, 0.05);
  for (std::size_t k = 0; k < grid.levels(); ++k) g(k, grid.nodes() - 1) = 0.0;
  const WeightedControlResult r = controller.solve(sample_initial(spec, *grid.mesh), &g);
  const ControlWeights& w = controller.weights();
  const double u_sq = weighted_norm_sq(right_values(r.state), w, 1);
  const double f_sq = weighted_norm_sq(right_values(r.control), w, 3, controller.mask());
  const double h1 = profile_norm(spec.alpha, *grid.mesh, r.u0, NormKind::H1alpha);
  EXPECT_NEAR(r.u_rho1_sq, u_sq, 1e-12 * u_sq);
  EXPECT_NEAR(r.f_rho3_sq, f_sq, 1e-12 * f_sq);
  const double expected = u_sq + f_sq + r.residual_rho1_sq + h1 * h1;
  EXPECT_NEAR(r.e_norm_sq, expected, 1e-10 * expected);
  // The state solves the equation, so L u - f 1_omega is g in the weighted norm.
  EXPECT_NEAR(r.residual_rho1_sq, r.g_rho1_sq, 1e-8 * r.g_rho1_sq);
}

TEST(WeightedControl, ObjectiveDecreasesAlongIterates) {
  const Grid grid = make_grid(32, 2.0, 0.5, 32);
  const ProblemSpec spec = weighted_spec();
  const WeightedControlResult r = solve_weighted_control(spec, sample_initial(spec, *grid.mesh), nullptr, quick_config(), grid);
  ASSERT_GE(r.objective_trace.size(), 2u);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
    EXPECT_LE(r.objective_trace[i], r.objective_trace[i - 1] * (1.0 + 1e-12)) << "iterate " << i;
  }
  EXPECT_NEAR(r.objective, r.objective_trace.back(), 1e-10 * r.objective);
}

TEST(WeightedControl, DrivesStateTowardZero) {
  const Grid grid = make_grid(64, 2.0, 0.5, 64);
  const ProblemSpec spec = weighted_spec();
  const auto u0 = sample_initial(spec, *grid.mesh);
  const WeightedControlResult r = solve_weighted_control(spec, u0, nullptr, {}, grid);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.final_norm, 1e-2 * vol_norm(*grid.mesh, u0));
}

TEST(WeightedControl, ConfigValidation) {
  WeightedControlConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.log_cap = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.params = {-1.0, 1.0};
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(ControlWeightsTest, ChainHoldsPointwise) {
  for (double lambda : {1.0, 2.0}) {
    const Grid grid = make_grid(40, 2.0, 0.5, 40);
    const ControlWeights w(grid, {2.0, lambda}, 17.0);
    EXPECT_LE(chain_defect(w), 1e-12);
    EXPECT_NEAR(w.chain_constant(), std::exp(-0.5 * lambda), 1e-15);
    for (std::size_t j = 1; j <= 40; ++j)
      for (std::size_t i = 0; i < grid.nodes(); ++i) {
        EXPECT_LE(w.log_weight(3, j, i), 17.0 - 3.0 * lambda + 1e-12);
        EXPECT_LE(w.log_weight(1, j, i), w.log_weight(0, j, i));
      }
  }
}

TEST(ControlWeightsTest, NormChainForAnyField) {
  const Grid grid = make_grid(24, 2.0, 0.5, 24);
  const ControlWeights w(grid, {2.0, 1.0}, 17.0);
  const double c2 = std::pow(w.chain_constant(), 2);
  IntervalField f(grid);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (std::size_t j = 1; j <= 24; ++j)
    for (std::size_t i = 0; i < grid.nodes(); ++i) f(j, i) = normal(rng);
  const double n1 = weighted_norm_sq(f, w, 1);
  const double n2 = weighted_norm_sq(f, w, 2);
  const double n3 = weighted_norm_sq(f, w, 3);
  EXPECT_LE(n3, c2 * n2 * (1.0 + 1e-12));
  EXPECT_LE(n2, c2 * n1 * (1.0 + 1e-12));
}

TEST(ControlWeightsTest, TerminalValueBoundedByWeightedNorm) {
  const Grid grid = make_grid(48, 2.0, 0.5, 48);
  const ProblemSpec spec = weighted_spec();
  const WeightedController controller(spec, grid, quick_config());
  const WeightedControlResult r = controller.solve(sample_initial(spec, *grid.mesh), nullptr);
  const std::size_t m = grid.time.steps();
  double min_weight = INFINITY;
  for (std::size_t i = 0; i + 1 < grid.nodes(); ++i) min_weight = std::min(min_weight, controller.weights().weight(1, m, i));
  const double bound = r.u_rho1_sq / (grid.time.dt() * min_weight);
  EXPECT_LE(r.final_norm * r.final_norm, bound * (1.0 + 1e-12));
}

TEST(Estimates, HomogeneousOfDegreeTwo) {
  const Grid grid = make_grid(32, 2.0, 0.5, 32);
  const ProblemSpec spec = weighted_spec();
  const WeightedController controller(spec, grid, quick_config());
  auto u0 = sample_initial(spec, *grid.mesh);
  const Field g = noise_field(grid, 21, 0.05);
  const WeightedControlResult a = controller.solve(u0, &g);
  for (double& v : u0) v *= 3.0;
  const Field g3 = 3.0 * g;
  const WeightedControlResult b = controller.solve(u0, &g3);
  const EstimateReport ea = additional_estimates(a, controller);
  const EstimateReport eb = additional_estimates(b, controller);
  EXPECT_NEAR(eb.lhs / ea.lhs, 9.0, 1e-6);
  EXPECT_NEAR(eb.rhs / ea.rhs, 9.0, 1e-6);
  EXPECT_NEAR(eb.constant, ea.constant, 1e-6 * ea.constant);
}

TEST(Supremo, ZeroStateGivesZero) {
  const Grid grid = make_grid(16, 2.0, 0.5, 16);
  const WeightedController controller(weighted_spec(), grid, quick_config());
  const WeightedControlResult r = controller.solve(std::vector<double>(grid.nodes(), 0.0), nullptr);
  const SupremoReport s = supremo_check(r, controller);
  EXPECT_EQ(s.sup, 0.0);
  EXPECT_EQ(s.ratio, 0.0);
  EXPECT_NEAR(s.m_s, std::exp(2.0) - std::exp(1.0), 1e-12);
}

TEST(Supremo, OddStateHasNoMean) {
  const Grid grid = make_grid(20, 1.0, 0.5, 10);
  const WeightedController controller(weighted_spec(), grid, quick_config());
  WeightedControlResult r(grid);
  r.state = Field(grid, [](double x, double t) { return (x - 0.5) * (1.0 + t); });
  r.e_norm_sq = 1.0;
  const SupremoReport s = supremo_check(r, controller);
  EXPECT_LE(s.sup, 1e-20);
}

TEST(Supremo, FiniteOnControlledStates) {
  const Grid grid = make_grid(32, 2.0, 0.5, 32);
  const ProblemSpec spec = weighted_spec();
  const WeightedController controller(spec, grid, quick_config());
  const WeightedControlResult r = controller.solve(sample_initial(spec, *grid.mesh), nullptr);
  const SupremoReport s = supremo_check(r, controller);
  EXPECT_TRUE(std::isfinite(s.ratio));
  EXPECT_GT(s.ratio, 0.0);
}
