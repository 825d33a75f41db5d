#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "degenctrl/errors.hpp"
#include "degenctrl/evolution.hpp"
#include "degenctrl/hum.hpp"
#include "degenctrl/weighted_control.hpp"

namespace degenctrl {

/// g(x, t, r, q) with r standing for u and q for u_x.
using Nonlinearity = std::function<double(double x, double t, double r, double q)>;

/// Semilinear term for u_t - (x^a u_x)_x + g(x, t, u, u_x) = h 1_omega.
/// `lipschitz` is K in |g_r| + x^{-a/2} |g_q| <= K.
struct SemilinearSpec {
  Nonlinearity g = [](double, double, double, double) { return 0.0; };
  Nonlinearity g_r = [](double, double, double, double) { return 0.0; };
  Nonlinearity g_q = [](double, double, double, double) { return 0.0; };
  double lipschitz = 0.0;

  /// Checks g(x, t, 0, 0) = 0 on the grid and compares the partials with
  /// central differences at `samples` random points. Throws InvalidArgument.
  void validate(const Grid& grid, unsigned seed = 1, int samples = 64) const;
};

/// ell in u_t - ell(int_0^1 u) (x^a u_x)_x = f 1_omega.
struct NonlocalSpec {
  std::function<double(double)> ell = [](double) { return 1.0; };
  std::function<double(double)> ell_prime = [](double) { return 0.0; };
  double lipschitz = 0.0;

  /// Throws InvalidArgument unless ell(0) = 1 within 1e-12.
  void validate() const;
};

struct Linearization {
  Field b0;
  Field b1;
  Field drift;  // x^{a/2} b1 = int_0^1 g_q d mu
  double reconstruction_defect = 0.0;  // max |g(w, w_x) - b0 w - drift w_x|
  double coefficient_bound = 0.0;      // ||b0||_inf + ||b1||_inf
};

/// b0[w] = int_0^1 g_r(mu w, mu w_x) d mu and b1[w] = x^{-a/2} int_0^1 g_q(mu w, mu w_x) d mu
/// by 8-point Gauss-Legendre, with w_x from centred differences.
///
/// At x = 0 the factor x^{-a/2} is replaced by its limit: b1 is taken from the
/// neighbouring node when the integral of g_q vanishes there, and a nonzero
/// integral throws NumericalDomainError (K would be infinite).
/// Throws QuadratureFailure when the reconstruction defect exceeds
/// 1e-6 (1 + ||w||_inf) and InvalidArgument when the coefficient bound exceeds 2K.
Linearization linearize_g(const SemilinearSpec& spec, double alpha, const Field& w);

class QuadratureFailure : public NumericalDomainError {
 public:
  using NumericalDomainError::NumericalDomainError;
};

struct IterationRecord {
  int iteration = 0;
  double coefficient_norm = 0.0;  // ||b0||_inf + ||b1||_inf or |ell - 1|_inf along the iterate
  double control_cost = 0.0;
  double final_norm = 0.0;
  double distance = 0.0;  // to the previous iterate
  double damping = 1.0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  bool converged = false;
  int iterations = 0;  // excludes the initial linear solve
};

enum class IterationFailureKind { stagnation, local_radius_exceeded };

class IterationFailure : public SolverFailure {
 public:
  IterationFailure(IterationFailureKind kind, const std::string& what, IterationTrace trace)
      : SolverFailure(what), kind_(kind), trace_(std::move(trace)) {}

  [[nodiscard]] IterationFailureKind kind() const { return kind_; }
  [[nodiscard]] const IterationTrace& trace() const { return trace_; }

 private:
  IterationFailureKind kind_;
  IterationTrace trace_;
};

struct PicardConfig {
  double tol = 1e-8;  // relative successive distance
  int max_iterations = 30;
  double damping = 1.0;
  double fallback_damping = 0.5;
};

struct SemilinearResult {
  ControlResult control;  // on the full grid; zero control before the split
  IterationTrace trace;
  std::size_t split_level = 0;
  Field free_phase;  // the uncontrolled trajectory on [0, T/4]
};

/// Two-phase null control: free semilinear evolution on [0, T/4] (implicit
/// Euler, Picard inside each step), then Picard over HUM solves of the
/// linearized problem on [T/4, T] starting from the free state. The linear
/// system with coefficients b[0] gives iterate 0. Requires m divisible by 4.
/// Throws IterationFailure on stagnation (five non-decreasing distances).
SemilinearResult solve_semilinear_control(const ProblemSpec& problem, const SemilinearSpec& spec,
                                          std::span<const double> u0, const HumConfig& hum, const Grid& grid,
                                          const PicardConfig& picard = {});

struct NonlocalConfig {
  WeightedControlConfig weighted;
  /// Successive solves agree only to the CG tolerance, so the Picard tolerance
  /// sits well above it.
  PicardConfig picard{1e-6};
  /// Upper bound on |u0|_{H^1_a}; larger data raise local_radius_exceeded at once.
  double radius = std::numeric_limits<double>::infinity();
};

struct NonlocalResult {
  WeightedControlResult control;
  IterationTrace trace;
  /// rho_1-weighted norm of u_t - ell(int u)(x^a u_x)_x - f 1_omega for the
  /// returned pair, relative to ||u||_{rho_1}.
  double nonlinear_residual = 0.0;
};

/// g^k = (ell(int u^k) - 1)(x^a u^k_x)_x fed to the weighted controller until
/// the rho_1 distance between successive states drops below tol. Iterate 0 is
/// the weighted control with g = 0. Throws IterationFailure with
/// local_radius_exceeded when the distance doubles over three iterations.
NonlocalResult solve_nonlocal_control(const ProblemSpec& problem, const NonlocalSpec& spec,
                                      std::span<const double> u0, const Grid& grid, const NonlocalConfig& cfg = {});

/// (ell(int u) - 1)(x^a u_x)_x on every level.
Field nonlocal_source(const NonlocalSpec& spec, double alpha, const Field& u);

}  // namespace degenctrl
