#include "degenctrl/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "degenctrl/errors.hpp"

namespace degenctrl {

void ProblemSpec::validate() const {
  if (!(alpha >= 2.0)) throw InvalidArgument("alpha >= 2 required");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon T must be positive");
  validate_interval(omega);
  if (geometric && omega.a != 0.0) {
    throw InvalidArgument("geometric condition (0, d) in omega requires omega.a = 0");
  }
}

std::vector<double> sample_initial(const ProblemSpec& spec, const SpaceMesh& mesh) {
  std::vector<double> u(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) u[i] = spec.u0(mesh.node(i));
  u.back() = 0.0;
  return u;
}

Coefficients Coefficients::zero(const Grid& grid) { return {Field(grid), Field(grid)}; }

bool Coefficients::time_independent() const {
  for (std::size_t k = 1; k < reaction.levels(); ++k) {
    for (std::size_t i = 0; i < reaction.nodes(); ++i) {
      if (reaction(k, i) != reaction(0, i) || drift(k, i) != drift(0, i)) return false;
    }
  }
  return true;
}

Coefficients sample_coefficients(const ProblemSpec& spec, const Grid& grid) {
  Coefficients c = Coefficients::zero(grid);
  const SpaceMesh& mesh = *grid.mesh;
  for (std::size_t k = 0; k < grid.levels(); ++k) {
    const double t = grid.time.instant(k);
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      const double x = mesh.node(i);
      c.reaction(k, i) = spec.b0(x, t);
      c.drift(k, i) = x == 0.0 ? 0.0 : std::pow(x, 0.5 * spec.alpha) * spec.b1(x, t);
    }
  }
  return c;
}

std::vector<double> Tridiagonal::apply(std::span<const double> u) const {
  const std::size_t n = size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * u[i];
    if (i > 0) v += lower[i] * u[i - 1];
    if (i + 1 < n) v += upper[i] * u[i + 1];
    out[i] = v;
  }
  return out;
}

std::vector<double> DiscreteOperator::apply(std::span<const double> u) const {
  std::vector<double> out = matrix.apply(u);
  out.back() = 0.0;
  return out;
}

DiscreteOperator assemble(double alpha, const SpaceMesh& mesh, std::span<const double> reaction,
                          std::span<const double> drift) {
  const std::size_t nodes = mesh.size();
  const std::size_t n = nodes - 1;
  DiscreteOperator op;
  Tridiagonal& a = op.matrix;
  a.lower.assign(nodes, 0.0);
  a.diag.assign(nodes, 0.0);
  a.upper.assign(nodes, 0.0);

  // conductance[i] = x_{i+1/2}^a / (x_{i+1} - x_i) for the face between nodes i and i+1.
  std::vector<double> conductance(n);
  for (std::size_t i = 0; i < n; ++i) conductance[i] = std::pow(mesh.face(i + 1), alpha) / mesh.spacing(i);

  for (std::size_t i = 0; i < n; ++i) {
    const double inv_vol = 1.0 / mesh.volume(i);
    const double right = conductance[i];
    const double left = i == 0 ? op.left_flux_coefficient : conductance[i - 1];
    a.diag[i] = (left + right) * inv_vol + reaction[i];
    a.upper[i] = -right * inv_vol;
    if (i > 0) a.lower[i] = -left * inv_vol;

    const double d = drift[i];
    if (d != 0.0) {
      if (i == 0) {
        const double c = d / mesh.spacing(0);
        a.diag[i] -= c;
        a.upper[i] += c;
      } else {
        const double c = d / (mesh.node(i + 1) - mesh.node(i - 1));
        a.upper[i] += c;
        a.lower[i] -= c;
      }
    }
  }
  a.diag[n] = 1.0;
  return op;
}

DiscreteOperator assemble(const ProblemSpec& spec, const SpaceMesh& mesh, double t) {
  std::vector<double> reaction(mesh.size());
  std::vector<double> drift(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const double x = mesh.node(i);
    reaction[i] = spec.b0(x, t);
    drift[i] = x == 0.0 ? 0.0 : std::pow(x, 0.5 * spec.alpha) * spec.b1(x, t);
  }
  return assemble(spec.alpha, mesh, reaction, drift);
}

TridiagonalSolver::TridiagonalSolver(const Tridiagonal& m) {
  const std::size_t n = m.size();
  lower_ = m.lower;
  inv_pivot_.resize(n);
  upper_scaled_.resize(n);
  double prev_upper = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pivot = m.diag[i] - (i > 0 ? m.lower[i] * prev_upper : 0.0);
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw SolverFailure("singular tridiagonal system: zero pivot at row " + std::to_string(i));
    }
    inv_pivot_[i] = 1.0 / pivot;
    upper_scaled_[i] = (i + 1 < n ? m.upper[i] : 0.0) * inv_pivot_[i];
    prev_upper = upper_scaled_[i];
  }
}

void TridiagonalSolver::solve(std::span<double> rhs) const {
  const std::size_t n = rhs.size();
  rhs[0] *= inv_pivot_[0];
  for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) * inv_pivot_[i];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_scaled_[i] * rhs[i + 1];
}

Tridiagonal step_matrix(const DiscreteOperator& op, double dt) {
  Tridiagonal m = op.matrix;
  const std::size_t n = m.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    m.lower[i] *= dt;
    m.diag[i] = 1.0 + dt * m.diag[i];
    m.upper[i] *= dt;
  }
  m.lower[n] = 0.0;
  m.diag[n] = 1.0;
  m.upper[n] = 0.0;
  return m;
}

void implicit_euler_step(const DiscreteOperator& op, double dt, std::span<double> state) {
  state.back() = 0.0;
  TridiagonalSolver(step_matrix(op, dt)).solve(state);
}

namespace {

// D^{-1} M^T D on the unknowns 0..n-1; the Dirichlet row stays the identity.
Tridiagonal volume_transpose(const Tridiagonal& m, const SpaceMesh& mesh) {
  const std::size_t n = m.size() - 1;
  Tridiagonal t;
  t.lower.assign(n + 1, 0.0);
  t.diag = m.diag;
  t.upper.assign(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) t.lower[i] = m.upper[i - 1] * mesh.volume(i - 1) / mesh.volume(i);
    if (i + 1 < n) t.upper[i] = m.lower[i + 1] * mesh.volume(i + 1) / mesh.volume(i);
  }
  return t;
}

}  // namespace

Evolution::Evolution(double alpha, Grid grid, const Coefficients& coefficients)
    : alpha_(alpha), grid_(std::move(grid)), shared_(coefficients.time_independent()) {
  const SpaceMesh& mesh = *grid_.mesh;
  const std::size_t count = shared_ ? 1 : grid_.time.steps();
  ops_.reserve(count);
  forward_solvers_.reserve(count);
  adjoint_solvers_.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t level = shared_ ? 1 : s + 1;
    ops_.push_back(assemble(alpha_, mesh, coefficients.reaction.level(level), coefficients.drift.level(level)));
    const Tridiagonal m = step_matrix(ops_.back(), grid_.time.dt());
    forward_solvers_.emplace_back(m);
    adjoint_solvers_.emplace_back(volume_transpose(m, mesh));
  }
}

Evolution::Evolution(const ProblemSpec& spec, Grid grid)
    : Evolution(spec.alpha, grid, sample_coefficients(spec, grid)) {}

const DiscreteOperator& Evolution::op(std::size_t level) const { return ops_[slot(level)]; }

Field Evolution::forward(std::span<const double> u0, const Field* source) const {
  Field u(grid_);
  const std::size_t n = u.nodes() - 1;
  std::copy(u0.begin(), u0.end(), u.level(0).begin());
  u(0, n) = 0.0;
  const double dt = grid_.time.dt();
  for (std::size_t k = 1; k < u.levels(); ++k) {
    auto cur = u.level(k);
    auto prev = u.level(k - 1);
    for (std::size_t i = 0; i < n; ++i) cur[i] = prev[i] + (source ? dt * (*source)(k, i) : 0.0);
    cur[n] = 0.0;
    forward_solvers_[slot(k)].solve(cur);
  }
  return u;
}

Field Evolution::adjoint(std::span<const double> terminal, const Field* source) const {
  Field v(grid_);
  const std::size_t n = v.nodes() - 1;
  const std::size_t m = v.levels() - 1;
  std::copy(terminal.begin(), terminal.end(), v.level(m).begin());
  v(m, n) = 0.0;
  const double dt = grid_.time.dt();
  for (std::size_t k = m; k-- > 0;) {
    auto cur = v.level(k);
    auto next = v.level(k + 1);
    for (std::size_t i = 0; i < n; ++i) cur[i] = next[i] + (source ? dt * (*source)(k, i) : 0.0);
    cur[n] = 0.0;
    adjoint_solvers_[slot(k + 1)].solve(cur);
  }
  return v;
}

Field solve_forward(const ProblemSpec& spec, const Field* source, const Grid& grid) {
  spec.validate();
  const Evolution evo(spec, grid);
  const std::vector<double> u0 = sample_initial(spec, *grid.mesh);
  if (spec.source == SourceMode::none || source == nullptr) return evo.forward(u0);
  if (spec.source == SourceMode::control_on_omega) {
    const Field restricted = restrict_to_omega(*source, spec.omega);
    return evo.forward(u0, &restricted);
  }
  return evo.forward(u0, source);
}

Field solve_adjoint(const ProblemSpec& spec, const Field* source, std::span<const double> terminal,
                    const Grid& grid) {
  spec.validate();
  const Evolution evo(spec, grid);
  return evo.adjoint(terminal, source);
}

double source_pairing(const Field& f, const Field& v) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < f.levels(); ++k) sum += vol_dot(f.mesh(), f.level(k + 1), v.level(k));
  return f.time().dt() * sum;
}

double observation_pairing(const Field& h, const Field& u) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < h.levels(); ++k) sum += vol_dot(h.mesh(), h.level(k), u.level(k + 1));
  return h.time().dt() * sum;
}

std::vector<double> flux_divergence(double alpha, const SpaceMesh& mesh, std::span<const double> u) {
  const std::size_t n = mesh.cells();
  std::vector<double> out(n + 1);
  double left_flux = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double right_flux = std::pow(mesh.face(i + 1), alpha) * (u[i + 1] - u[i]) / mesh.spacing(i);
    out[i] = (right_flux - left_flux) / mesh.volume(i);
    left_flux = right_flux;
  }
  out[n] = out[n - 1];
  return out;
}

std::vector<double> nodal_gradient(const SpaceMesh& mesh, std::span<const double> u) {
  const std::size_t n = mesh.cells();
  std::vector<double> g(n + 1);
  g[0] = (u[1] - u[0]) / mesh.spacing(0);
  for (std::size_t i = 1; i < n; ++i) g[i] = (u[i + 1] - u[i - 1]) / (mesh.node(i + 1) - mesh.node(i - 1));
  g[n] = (u[n] - u[n - 1]) / mesh.spacing(n - 1);
  return g;
}

double weighted_gradient_energy(double alpha, const SpaceMesh& mesh, std::span<const double> u) {
  double sum = 0.0;
  for (std::size_t i = 0; i < mesh.cells(); ++i) {
    const double slope = (u[i + 1] - u[i]) / mesh.spacing(i);
    sum += std::pow(mesh.face(i + 1), alpha) * slope * slope * mesh.spacing(i);
  }
  return sum;
}

double profile_norm(double alpha, const SpaceMesh& mesh, std::span<const double> u, NormKind which) {
  double sq = vol_dot(mesh, u, u);
  if (which != NormKind::L2) sq += weighted_gradient_energy(alpha, mesh, u);
  if (which == NormKind::H2alpha) {
    const std::vector<double> div = flux_divergence(alpha, mesh, u);
    for (std::size_t i = 0; i < mesh.cells(); ++i) sq += mesh.volume(i) * div[i] * div[i];
  }
  return std::sqrt(sq);
}

double hs_norm(double alpha, const Field& u, NormKind which) {
  double best = 0.0;
  for (std::size_t k = 0; k < u.levels(); ++k) best = std::max(best, profile_norm(alpha, u.mesh(), u.level(k), which));
  return best;
}

EnergyBalance energy_balance(double alpha, const Field& u, const Field* source) {
  double sup = 0.0;
  double grad = 0.0;
  for (std::size_t k = 0; k < u.levels(); ++k) {
    sup = std::max(sup, vol_dot(u.mesh(), u.level(k), u.level(k)));
    if (k > 0) grad += weighted_gradient_energy(alpha, u.mesh(), u.level(k));
  }
  const double dt = u.time().dt();
  const double f2 = source ? std::pow(l2_qt(*source), 2) : 0.0;
  return {sup + dt * grad, f2 + vol_dot(u.mesh(), u.level(0), u.level(0))};
}

}  // namespace degenctrl
