#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "degenctrl/evolution.hpp"
#include "degenctrl/grid.hpp"
#include "degenctrl/weights.hpp"

namespace degenctrl {

enum class WeightFamily { sigma, a };

std::string to_string(WeightFamily family);

enum class RatioStatus {
  ok,
  zero_over_zero,  // both sides vanish
  violation,       // right side vanishes while the left side does not
};

std::string to_string(RatioStatus status);

/// Both sides of a Carleman inequality for one adjoint solution.
///
/// The weights e^{-2s sigma} and e^{-2sA} reach e^{-10^4} and below, so every
/// integral is kept as its logarithm (-inf for an exact zero). Left terms, with
/// w = xi for the sigma family and w = zeta for the A family:
///   0: s^{-1} lambda^{-1} w^{-1} |v_t|^2
///   1: s^{-1} lambda^{-1} w^{-1} |(x^a v_x)_x|^2
///   2: s lambda^2 w x^a |v_x|^2
///   3: s^3 lambda^4 w^3 |v|^2
/// Right terms:
///   0: |h|^2
///   1: s^3 lambda^4 w^k |v|^2 on omega, k = 3 (sigma) or 6 (A)
/// each multiplied by the exponential weight.
struct CarlemanReport {
  WeightFamily family = WeightFamily::sigma;
  CarlemanParams params;
  std::array<double, 4> log_lhs_terms{};
  std::array<double, 2> log_rhs_terms{};
  double log_lhs = 0.0;
  double log_rhs = 0.0;
  /// LHS / RHS, NaN unless status is ok. May overflow to +inf only if the
  /// log-ratio exceeds the double range.
  double ratio = 0.0;
  double log_ratio = 0.0;
  RatioStatus status = RatioStatus::ok;

  [[nodiscard]] double lhs_term(std::size_t i) const;
  [[nodiscard]] double rhs_term(std::size_t i) const;
};

/// Evaluates both sides of the sigma-family inequality for the adjoint of
/// `spec` with terminal datum `terminal` and source `h` (nullptr for h = 0).
/// The weight vanishes at t = 0 and t = T; integrals sample interval midpoints.
CarlemanReport carleman_sigma(const ProblemSpec& spec, const Grid& grid, std::span<const double> terminal,
                              const Field* h, CarlemanParams params);

/// Same for the (tau, zeta, A) family. Requires b0 = b1 = 0.
CarlemanReport carleman_a(const ProblemSpec& spec, const Grid& grid, std::span<const double> terminal,
                          const Field* h, CarlemanParams params);

struct ObservabilityReport {
  double log_numerator = 0.0;    // log |v(0)|^2
  double log_denominator = 0.0;  // log of the weighted omega integral
  double log_constant = 0.0;
  RatioStatus status = RatioStatus::ok;
};

/// |v(., 0)|^2 over the observation integral, in log form. The observation is
/// int_{omega_T} e^{-2s sigma} xi^3 |v|^2 for the sigma family and
/// s^3 lambda^4 int_{omega_T} rho_3^{-2} |v|^2 for the A family.
ObservabilityReport observability_constant(const ProblemSpec& spec, const Grid& grid,
                                           std::span<const double> terminal, CarlemanParams params,
                                           WeightFamily family);

/// Smooth unit-norm terminal data sum_{k=1}^{modes} c_k cos((k - 1/2) pi x)
/// with standard normal c_k. The function does not depend on the mesh, so
/// one seed gives the same datum on every refinement.
std::vector<double> random_terminal(const SpaceMesh& mesh, std::uint64_t seed, int modes = 8);

struct EmpiricalConstant {
  double max_ratio = 0.0;  // C_emp
  double max_log_ratio = -std::numeric_limits<double>::infinity();
  int draws = 0;
  int non_finite = 0;  // draws whose ratio was not finite
};

/// Maximum of LHS/RHS (Carleman) over `draws` random terminal data, h = 0.
/// Draw d uses seed + d.
EmpiricalConstant empirical_carleman_constant(const ProblemSpec& spec, const Grid& grid, CarlemanParams params,
                                              WeightFamily family, int draws, std::uint64_t seed);

/// Maximum log observability constant over random terminal data.
double empirical_log_observability(const ProblemSpec& spec, const Grid& grid, CarlemanParams params,
                                   WeightFamily family, int draws, std::uint64_t seed);

}  // namespace degenctrl
