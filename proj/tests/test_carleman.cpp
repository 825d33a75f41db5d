#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "degenctrl/carleman.hpp"
#include "degenctrl/catalog.hpp"
#include "degenctrl/errors.hpp"

using namespace degenctrl;

namespace {

ProblemSpec theorem_spec() {
  ProblemSpec spec;
  spec.alpha = 2.0;
  spec.horizon = 1.0;
  spec.omega = {0.0, 0.3};
  return spec;
}

Field random_source(const Grid& grid, std::uint64_t seed) {
  Field h(grid);
  for (std::size_t k = 0; k < grid.levels(); ++k) {
    const auto profile = random_terminal(*grid.mesh, seed + k, 4);
    for (std::size_t i = 0; i < grid.nodes(); ++i) h(k, i) = profile[i];
  }
  return h;
}

Field scaled(Field f, double factor) { return factor * std::move(f); }

std::vector<double> scaled(std::vector<double> v, double factor) {
  for (double& x : v) x *= factor;
  return v;
}

void expect_scaled_by_four(const CarlemanReport& base, const CarlemanReport& doubled) {
  const double log4 = std::log(4.0);
  for (std::size_t i = 0; i < 4; ++i) {
    ASSERT_TRUE(std::isfinite(base.log_lhs_terms[i]));
    EXPECT_NEAR(doubled.log_lhs_terms[i] - base.log_lhs_terms[i], log4, 1e-10) << "lhs term " << i;
  }
  for (std::size_t i = 0; i < 2; ++i) {
    if (!std::isfinite(base.log_rhs_terms[i])) {
      EXPECT_EQ(doubled.log_rhs_terms[i], base.log_rhs_terms[i]);
      continue;
    }
    EXPECT_NEAR(doubled.log_rhs_terms[i] - base.log_rhs_terms[i], log4, 1e-10) << "rhs term " << i;
  }
  EXPECT_NEAR(doubled.log_ratio, base.log_ratio, 1e-10);
}

}  // namespace

TEST(CarlemanSigma, ZeroDataIsZeroOverZero) {
  const Grid grid = make_grid(32, 2.0, 1.0, 32);
  const std::vector<double> zero(grid.nodes(), 0.0);
  const CarlemanReport r = carleman_sigma(theorem_spec(), grid, zero, nullptr, {2.0, 2.0});
  EXPECT_EQ(r.status, RatioStatus::zero_over_zero);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(r.lhs_term(i), 0.0);
  EXPECT_EQ(r.rhs_term(0), 0.0);
  EXPECT_EQ(r.rhs_term(1), 0.0);
  EXPECT_TRUE(std::isnan(r.ratio));
}

TEST(CarlemanSigma, HomogeneousOfDegreeTwo) {
  const Grid grid = make_grid(48, 2.0, 1.0, 48);
  const auto vt = random_terminal(*grid.mesh, 17);
  const Field h = random_source(grid, 100);
  const CarlemanParams params{2.0, 2.0};
  const CarlemanReport base = carleman_sigma(theorem_spec(), grid, vt, &h, params);
  const Field h2 = scaled(h, 2.0);
  const CarlemanReport doubled = carleman_sigma(theorem_spec(), grid, scaled(vt, 2.0), &h2, params);
  expect_scaled_by_four(base, doubled);
}

TEST(CarlemanSigma, RandomDataGivesFiniteRatio) {
  const Grid grid = make_grid(64, 2.0, 1.0, 64);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CarlemanReport r = carleman_sigma(theorem_spec(), grid, random_terminal(*grid.mesh, seed), nullptr, {2.0, 2.0});
    EXPECT_EQ(r.status, RatioStatus::ok);
    EXPECT_TRUE(std::isfinite(r.log_ratio));
    EXPECT_EQ(r.log_rhs_terms[0], -INFINITY);
  }
}

TEST(CarlemanSigma, RejectsParametersBelowFloor) {
  const Grid grid = make_grid(8, 2.0, 1.0, 8);
  const auto vt = random_terminal(*grid.mesh, 1);
  EXPECT_THROW(carleman_sigma(theorem_spec(), grid, vt, nullptr, {0.5, 2.0}), InvalidArgument);
}

TEST(CarlemanA, ZeroDataIsZeroOverZero) {
  const Grid grid = make_grid(32, 2.0, 1.0, 32);
  const std::vector<double> zero(grid.nodes(), 0.0);
  const CarlemanReport r = carleman_a(theorem_spec(), grid, zero, nullptr, {2.0, 2.0});
  EXPECT_EQ(r.status, RatioStatus::zero_over_zero);
}

TEST(CarlemanA, HomogeneousOfDegreeTwo) {
  const Grid grid = make_grid(48, 2.0, 1.0, 48);
  const auto vt = random_terminal(*grid.mesh, 23);
  const Field h = random_source(grid, 300);
  const CarlemanParams params{2.0, 2.0};
  const CarlemanReport base = carleman_a(theorem_spec(), grid, vt, &h, params);
  const Field h2 = scaled(h, 2.0);
  const CarlemanReport doubled = carleman_a(theorem_spec(), grid, scaled(vt, 2.0), &h2, params);
  expect_scaled_by_four(base, doubled);
}

TEST(CarlemanA, RequiresVanishingLowerOrderTerms) {
  const Grid grid = make_grid(8, 2.0, 1.0, 8);
  ProblemSpec spec = theorem_spec();
  spec.b0 = catalog::coefficient("constant", 1.0);
  EXPECT_THROW(carleman_a(spec, grid, random_terminal(*grid.mesh, 1), nullptr, {2.0, 2.0}), InvalidArgument);
}

TEST(CarlemanA, WeightsStayFiniteAtStart) {
  const AFamily family(1.0, {2.0, 2.0});
  for (double x : {0.0, 0.25, 0.5, 1.0}) {
    EXPECT_TRUE(std::isfinite(family.log_weight(x, 0.0, 6.0)));
    EXPECT_TRUE(std::isfinite(family.log_rho(3, x, 0.0)));
  }
  const Grid grid = make_grid(32, 2.0, 1.0, 32);
  const CarlemanReport r = carleman_a(theorem_spec(), grid, random_terminal(*grid.mesh, 4), nullptr, {2.0, 2.0});
  for (double term : r.log_lhs_terms) EXPECT_TRUE(std::isfinite(term));
  EXPECT_EQ(r.status, RatioStatus::ok);
}

TEST(Observability, ZeroDataIsZeroOverZero) {
  const Grid grid = make_grid(16, 2.0, 1.0, 16);
  const std::vector<double> zero(grid.nodes(), 0.0);
  for (WeightFamily family : {WeightFamily::sigma, WeightFamily::a}) {
    const ObservabilityReport r = observability_constant(theorem_spec(), grid, zero, {2.0, 2.0}, family);
    EXPECT_EQ(r.status, RatioStatus::zero_over_zero);
  }
}

TEST(Observability, HomogeneousOfDegreeZero) {
  const Grid grid = make_grid(32, 2.0, 1.0, 32);
  const auto vt = random_terminal(*grid.mesh, 9);
  for (WeightFamily family : {WeightFamily::sigma, WeightFamily::a}) {
    const ObservabilityReport a = observability_constant(theorem_spec(), grid, vt, {2.0, 2.0}, family);
    const ObservabilityReport b = observability_constant(theorem_spec(), grid, scaled(vt, 3.0), {2.0, 2.0}, family);
    EXPECT_NEAR(b.log_numerator - a.log_numerator, std::log(9.0), 1e-10);
    EXPECT_NEAR(b.log_constant, a.log_constant, 1e-10);
  }
}

TEST(Observability, ConstantStableUnderRefinement) {
  std::vector<double> constants;
  for (std::size_t n : {64, 128}) {
    const Grid grid = make_grid(n, 2.0, 1.0, n);
    constants.push_back(empirical_log_observability(theorem_spec(), grid, {2.0, 2.0}, WeightFamily::sigma, 5, 11));
  }
  EXPECT_LE(std::abs(constants[1] - constants[0]), std::log(2.0));
}

TEST(Observability, WindowAwayFromOriginIsReported) {
  ProblemSpec spec = theorem_spec();
  spec.omega = {0.5, 0.8};
  spec.geometric = false;
  const Grid grid = make_grid(32, 2.0, 1.0, 32);
  const ObservabilityReport r =
      observability_constant(spec, grid, random_terminal(*grid.mesh, 2), {2.0, 2.0}, WeightFamily::sigma);
  EXPECT_TRUE(std::isfinite(r.log_constant));
}

TEST(RandomTerminal, UnitNormAndDeterministic) {
  const SpaceMesh mesh = make_graded_mesh(200, 2.0);
  const auto a = random_terminal(mesh, 42);
  const auto b = random_terminal(mesh, 42);
  const auto c = random_terminal(mesh, 43);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NEAR(vol_norm(mesh, a), 1.0, 1e-12);
  EXPECT_EQ(a.back(), 0.0);
}

TEST(RandomTerminal, SameFunctionOnNestedMeshes) {
  const SpaceMesh coarse = make_graded_mesh(32, 2.0);
  const SpaceMesh fine = make_graded_mesh(64, 2.0);
  const auto a = random_terminal(coarse, 5);
  const auto b = random_terminal(fine, 5);
  for (std::size_t i = 0; i < coarse.size(); ++i) EXPECT_NEAR(a[i], b[2 * i], 5e-3);
}

TEST(EmpiricalConstant, CountsDrawsAndStaysFinite) {
  const Grid grid = make_grid(32, 2.0, 1.0, 32);
  const EmpiricalConstant c = empirical_carleman_constant(theorem_spec(), grid, {2.0, 2.0}, WeightFamily::sigma, 6, 1);
  EXPECT_EQ(c.draws, 6);
  EXPECT_EQ(c.non_finite, 0);
  EXPECT_TRUE(std::isfinite(c.max_log_ratio));
  EXPECT_GT(c.max_ratio, 0.0);
}

TEST(WeightFamilyNames, RoundTrip) {
  EXPECT_EQ(to_string(WeightFamily::sigma), "sigma");
  EXPECT_EQ(to_string(WeightFamily::a), "a");
  EXPECT_EQ(to_string(RatioStatus::zero_over_zero), "zero_over_zero");
}
