#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "degenctrl/evolution.hpp"
#include "degenctrl/grid.hpp"
#include "degenctrl/weights.hpp"

namespace degenctrl {

/// rho-weights sampled at interval midpoints in the form the controller can
/// represent in double precision.
///
/// The weights come from AFamily::normalized (tau(0) = 1). Their logarithms are
/// shifted by S = min 2 log rho_3 over the sample points and capped at
/// cap - i lambda, so that W_i = rho_i^2 e^{-S} wherever the cap is inactive,
/// blow-up toward T turns into a plateau, and the chain W_3 <= c^2 W_2 <= c^4 W_1
/// <= c^6 W_0 with c = e^{-lambda/2} survives the cap exactly.
class ControlWeights {
 public:
  ControlWeights(const Grid& grid, CarlemanParams params, double log_cap);

  [[nodiscard]] const AFamily& family() const { return family_; }
  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] double shift() const { return shift_; }
  [[nodiscard]] double log_cap() const { return log_cap_; }
  [[nodiscard]] double chain_constant() const;

  /// log W_i at interval j (1..m), node.
  [[nodiscard]] double log_weight(int i, std::size_t j, std::size_t node) const {
    return log_[static_cast<std::size_t>(i)][(j - 1) * nodes_ + node];
  }
  [[nodiscard]] double weight(int i, std::size_t j, std::size_t node) const {
    return w_[static_cast<std::size_t>(i)][(j - 1) * nodes_ + node];
  }
  /// Uncapped, unshifted log rho_i^2 at interval j, node.
  [[nodiscard]] double raw_log_rho_sq(int i, std::size_t j, std::size_t node) const;

 private:
  AFamily family_;
  Grid grid_;
  std::size_t nodes_;
  double shift_;
  double log_cap_;
  std::vector<double> log_[4];
  std::vector<double> w_[4];
};

/// Largest value of log W_{i+1} - log W_i - log c^2 over i = 0..2 and all
/// sample points; the chain W_3 <= c^2 W_2 <= c^4 W_1 <= c^6 W_0 holds when it is <= 0.
double chain_defect(const ControlWeights& weights);

/// dt * sum_j sum_i vol_i W_k(j, i) values(j, i)^2, optionally masked.
double weighted_norm_sq(const IntervalField& values, const ControlWeights& weights, int k,
                        std::span<const double> mask = {});

struct WeightedControlConfig {
  CarlemanParams params{2.0, 1.0};
  double log_cap = 17.0;
  double cg_tol = 1e-10;
  int cg_maxit = 3000;
  /// Record F along the CG iterates (one extra forward solve per iterate).
  bool track_objective = true;

  void validate() const;
};

struct WeightedControlResult {
  explicit WeightedControlResult(const Grid& grid) : control(grid), state(grid), source(grid) {}

  Field control;  // f on omega; the state is driven by mask * f + g
  Field state;
  Field source;   // g
  std::vector<double> u0;

  double u_rho1_sq = 0.0;
  double f_rho3_sq = 0.0;
  double residual_rho1_sq = 0.0;  // ||L u - f 1_omega||^2 in rho_1^2
  double u0_h1_sq = 0.0;
  double e_norm_sq = 0.0;
  double g_rho1_sq = 0.0;
  double final_norm = 0.0;
  double objective = 0.0;

  int cg_iterations = 0;
  bool converged = true;
  std::vector<double> objective_trace;
  std::vector<std::string> warnings;
};

/// Weighted least-squares null control for u_t - (x^a u_x)_x = f 1_omega + g:
/// minimise F(f) = 1/2 ||f||^2_{rho_3^2, omega} + 1/2 ||u_f||^2_{rho_1^2}
/// by preconditioned CG with adjoint gradients.
class WeightedController {
 public:
  WeightedController(const ProblemSpec& spec, const Grid& grid, const WeightedControlConfig& cfg);

  [[nodiscard]] const Evolution& evolution() const { return evolution_; }
  [[nodiscard]] const ControlWeights& weights() const { return weights_; }
  [[nodiscard]] const std::vector<double>& mask() const { return mask_; }
  [[nodiscard]] double alpha() const { return alpha_; }

  /// `g` may be nullptr for g = 0.
  [[nodiscard]] WeightedControlResult solve(std::span<const double> u0, const Field* g) const;

  /// F evaluated at a control.
  [[nodiscard]] double objective(std::span<const double> u0, const Field* g, const Field& control) const;

 private:
  [[nodiscard]] Field drive(const Field& control, const Field* g) const;

  double alpha_;
  Evolution evolution_;
  std::vector<double> mask_;
  ControlWeights weights_;
  WeightedControlConfig cfg_;
};

WeightedControlResult solve_weighted_control(const ProblemSpec& spec, std::span<const double> u0, const Field* g,
                                             const WeightedControlConfig& cfg, const Grid& grid);

/// A probe (h, v_T) for the transposition identity.
struct Probe {
  Field h;
  std::vector<double> terminal;
};

/// max over probes of | int u h + <u(T), v_T> - <u0, v(0)> - int (source) v |,
/// v the adjoint from (h, v_T); `source` is the full right-hand side f 1_omega + g.
double transposition_check(const Evolution& evolution, const Field& u, const Field& source,
                           std::span<const double> u0, const std::vector<Probe>& probes);

struct EstimateReport {
  double lhs = 0.0;  // ||x^{a/2}u_x||^2_{rho2} + ||u_t||^2_{rho3} + ||(x^a u_x)_x||^2_{rho3}
  double rhs = 0.0;  // ||u||^2_{rho1} + ||f||^2_{rho3} + ||g||^2_{rho1} + |u0|^2_{H1a}
  double constant = 0.0;
};

EstimateReport additional_estimates(const WeightedControlResult& result, const WeightedController& controller);

struct SupremoReport {
  double sup = 0.0;
  double e_norm_sq = 0.0;
  double ratio = 0.0;
  double m_s = 0.0;
};

/// sup over interval midpoints of e^{M_s/m(t)} (int u dx)^2 with M_s = s beta / 2,
/// beta = min_x m A = e^{2 lambda} - e^{lambda}; the exponential goes through the
/// same shift and cap as the rho weights.
SupremoReport supremo_check(const WeightedControlResult& result, const WeightedController& controller);

}  // namespace degenctrl
