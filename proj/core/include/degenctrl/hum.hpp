#pragma once

#include <span>
#include <string>
#include <vector>

#include "degenctrl/evolution.hpp"
#include "degenctrl/grid.hpp"

namespace degenctrl {

/// Penalized HUM functional J(h) = 1/2 int_{omega_T} |h|^2 + |u(T)|^2 / (2 epsilon).
struct HumConfig {
  double epsilon = 1e-4;
  double cg_tol = 1e-10;
  int cg_maxit = 4000;

  void validate() const;
};

struct ControlResult {
  explicit ControlResult(const Grid& grid) : control(grid), state(grid) {}

  /// Control h on the nodes of omega; the state is driven by mask * h.
  Field control;
  Field state;
  double final_norm = 0.0;
  double free_final_norm = 0.0;
  double control_cost = 0.0;
  double j_value = 0.0;
  double epsilon = 0.0;
  int cg_iterations = 0;
  double cg_residual = 0.0;
  /// ||h + phi 1_omega|| / ||h|| with phi the adjoint from u(T) / epsilon.
  double optimality_residual = 0.0;
  bool converged = true;
  std::vector<std::string> warnings;
};

/// Precomputed dynamics plus control footprint for repeated Gramian solves.
class HumSolver {
 public:
  HumSolver(Evolution evolution, Interval omega);
  HumSolver(const ProblemSpec& spec, const Grid& grid);

  [[nodiscard]] const Evolution& evolution() const { return evolution_; }
  [[nodiscard]] const std::vector<double>& mask() const { return mask_; }

  /// Lambda phi_T: terminal trace of the forward solve with u0 = 0 driven by
  /// mask * v(t_{k-1}), v the adjoint from phi_T. Symmetric PSD in the
  /// cell-volume inner product.
  [[nodiscard]] std::vector<double> gramian_apply(std::span<const double> terminal) const;

  /// Source mask * h for a control h.
  [[nodiscard]] Field source_of(const Field& control) const;
  /// dt * sum_{k>=1} sum_i vol_i mask_i h_i^2.
  [[nodiscard]] double control_cost(const Field& control) const;

  /// CG on (Lambda + epsilon I) phi_T = u_free(T); h = -v 1_omega.
  [[nodiscard]] ControlResult solve(std::span<const double> u0, const HumConfig& cfg) const;

 private:
  [[nodiscard]] Field control_from_adjoint(const Field& adjoint) const;

  Evolution evolution_;
  Interval omega_;
  std::vector<double> mask_;
};

std::vector<double> gramian_apply(const ProblemSpec& spec, std::span<const double> terminal, const Grid& grid);

ControlResult solve_hum(const ProblemSpec& spec, std::span<const double> u0, const HumConfig& cfg,
                        const Grid& grid);

struct WindowRow {
  Interval omega;
  std::size_t n = 0;
  std::size_t m = 0;
  double control_cost = 0.0;
  double final_norm = 0.0;
  double j_value = 0.0;
  int cg_iterations = 0;
};

/// solve_hum for every window and every (n, m) pair at fixed epsilon.
/// Windows need not touch x = 0: the geometric flag is ignored here.
std::vector<WindowRow> control_cost_vs_window(const ProblemSpec& spec, const HumConfig& cfg,
                                              const std::vector<Interval>& windows,
                                              const std::vector<std::size_t>& sizes, double grading);

}  // namespace degenctrl
