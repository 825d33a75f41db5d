#pragma once

#include <functional>
#include <span>
#include <vector>

#include "degenctrl/grid.hpp"

namespace degenctrl {

enum class SourceMode { none, full_domain, control_on_omega };

/// Linear degenerate problem u_t - (x^a u_x)_x + x^{a/2} b1 u_x + b0 u = source,
/// u(1,t) = 0, (x^a u_x)(0,t) = 0.
struct ProblemSpec {
  double alpha = 2.0;
  double horizon = 1.0;
  Interval omega{0.0, 0.3};
  /// Requires omega to contain a neighbourhood (0, d) of the degenerate point.
  bool geometric = true;
  SpaceTimeFunction b0 = [](double, double) { return 0.0; };
  SpaceTimeFunction b1 = [](double, double) { return 0.0; };
  std::function<double(double)> u0 = [](double) { return 0.0; };
  SourceMode source = SourceMode::none;

  /// Throws InvalidArgument on alpha < 2, T <= 0, a bad omega, or a violated
  /// geometric condition.
  void validate() const;
};

/// Nodal samples of the initial datum, with the Dirichlet node zeroed.
std::vector<double> sample_initial(const ProblemSpec& spec, const SpaceMesh& mesh);

/// Per-level coefficient samples. `drift` stores the product x^{a/2} b1.
struct Coefficients {
  Field reaction;
  Field drift;

  static Coefficients zero(const Grid& grid);
  [[nodiscard]] bool time_independent() const;
};

Coefficients sample_coefficients(const ProblemSpec& spec, const Grid& grid);

/// Tridiagonal matrix over all n+1 nodes. Row n is the identity row that pins
/// the Dirichlet value u_n = 0.
struct Tridiagonal {
  std::vector<double> lower;  // lower[i] couples row i to node i-1
  std::vector<double> diag;
  std::vector<double> upper;  // upper[i] couples row i to node i+1

  [[nodiscard]] std::size_t size() const { return diag.size(); }
  [[nodiscard]] std::vector<double> apply(std::span<const double> u) const;
};

/// Finite-volume discretization of u -> -(x^a u_x)_x + x^{a/2} b1 u_x + b0 u.
///
/// Face fluxes F_{i+1/2} = x_{i+1/2}^a (u_{i+1} - u_i) / (x_{i+1} - x_i), the
/// flux through x = 0 is exactly zero, convection is centred. With b0 = b1 = 0
/// the matrix is symmetric in the cell-volume inner product.
struct DiscreteOperator {
  Tridiagonal matrix;
  /// Coefficient multiplying the flux through face 0 (always 0).
  double left_flux_coefficient = 0.0;

  /// A u on nodes 0..n-1; entry n is 0.
  [[nodiscard]] std::vector<double> apply(std::span<const double> u) const;
};

DiscreteOperator assemble(double alpha, const SpaceMesh& mesh, std::span<const double> reaction,
                          std::span<const double> drift);
DiscreteOperator assemble(const ProblemSpec& spec, const SpaceMesh& mesh, double t);

/// Pre-factored Thomas solver for one tridiagonal system.
class TridiagonalSolver {
 public:
  explicit TridiagonalSolver(const Tridiagonal& matrix);
  void solve(std::span<double> rhs) const;

 private:
  std::vector<double> lower_;
  std::vector<double> inv_pivot_;
  std::vector<double> upper_scaled_;
};

/// I + dt A on the unknowns, identity on the Dirichlet row.
Tridiagonal step_matrix(const DiscreteOperator& op, double dt);

/// One step (I + dt A) u_new = state, in place.
void implicit_euler_step(const DiscreteOperator& op, double dt, std::span<double> state);

/// Implicit-Euler time marching for the forward problem and its exact discrete
/// adjoint (transpose in the cell-volume inner product).
///
/// Forward step: (I + dt A^{k}) u^{k} = u^{k-1} + dt f^{k}.
/// Adjoint step: (I + dt A^{k+1})~ v^{k} = v^{k+1} + dt h^{k}.
/// Together they satisfy, exactly up to rounding,
///   <u^m, v^m> - <u^0, v^0> = source_pairing(f, v) - observation_pairing(h, u).
class Evolution {
 public:
  Evolution(double alpha, Grid grid, const Coefficients& coefficients);
  Evolution(const ProblemSpec& spec, Grid grid);

  [[nodiscard]] const Grid& grid() const { return grid_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] const DiscreteOperator& op(std::size_t level) const;

  /// Throws SolverFailure on a zero pivot.
  [[nodiscard]] Field forward(std::span<const double> u0, const Field* source = nullptr) const;
  [[nodiscard]] Field adjoint(std::span<const double> terminal, const Field* source = nullptr) const;

 private:
  [[nodiscard]] std::size_t slot(std::size_t level) const { return shared_ ? 0 : level - 1; }

  double alpha_;
  Grid grid_;
  bool shared_;
  std::vector<DiscreteOperator> ops_;
  std::vector<TridiagonalSolver> forward_solvers_;
  std::vector<TridiagonalSolver> adjoint_solvers_;
};

/// Full trajectory of the forward problem; the source is restricted to omega
/// when spec.source is control_on_omega and ignored when it is none.
Field solve_forward(const ProblemSpec& spec, const Field* source, const Grid& grid);
Field solve_adjoint(const ProblemSpec& spec, const Field* source, std::span<const double> terminal,
                    const Grid& grid);

/// dt * sum_{k=0}^{m-1} <f^{k+1}, v^k>.
double source_pairing(const Field& f, const Field& v);
/// dt * sum_{k=0}^{m-1} <h^k, u^{k+1}>.
double observation_pairing(const Field& h, const Field& u);

enum class NormKind { L2, H1alpha, H2alpha };

/// (x^a u_x)_x at nodes from the assembly flux stencil; node n copies node n-1.
std::vector<double> flux_divergence(double alpha, const SpaceMesh& mesh, std::span<const double> u);
/// Centred differences, one-sided at both ends.
std::vector<double> nodal_gradient(const SpaceMesh& mesh, std::span<const double> u);
/// sum over faces of x_f^a |u_x|^2 h, i.e. |x^{a/2} u_x|_2^2.
double weighted_gradient_energy(double alpha, const SpaceMesh& mesh, std::span<const double> u);

double profile_norm(double alpha, const SpaceMesh& mesh, std::span<const double> u, NormKind which);
/// sup over time levels of profile_norm.
double hs_norm(double alpha, const Field& u, NormKind which);

struct EnergyBalance {
  double lhs;  // sup_t |u|^2 + ||x^{a/2} u_x||^2
  double rhs;  // ||f||^2 + |u0|^2
};

EnergyBalance energy_balance(double alpha, const Field& u, const Field* source);

}  // namespace degenctrl
