#include "degenctrl/weighted_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "degenctrl/cg.hpp"
#include "degenctrl/errors.hpp"

namespace degenctrl {

ControlWeights::ControlWeights(const Grid& grid, CarlemanParams params, double log_cap)
    : family_(AFamily::normalized(grid.time.end() - grid.time.start(), params)),
      grid_(grid),
      nodes_(grid.nodes()),
      shift_(std::numeric_limits<double>::infinity()),
      log_cap_(log_cap) {
  const std::size_t count = nodes_ * grid.time.steps();
  for (auto& v : log_) v.resize(count);
  for (auto& v : w_) v.resize(count);
  for (std::size_t j = 1; j <= grid.time.steps(); ++j) {
    for (std::size_t i = 0; i < nodes_; ++i) shift_ = std::min(shift_, raw_log_rho_sq(3, j, i));
  }
  const double lam = params.lambda;
  for (int k = 0; k < 4; ++k) {
    const double cap = log_cap - k * lam;
    auto& lg = log_[static_cast<std::size_t>(k)];
    auto& w = w_[static_cast<std::size_t>(k)];
    for (std::size_t j = 1; j <= grid.time.steps(); ++j) {
      for (std::size_t i = 0; i < nodes_; ++i) {
        const std::size_t idx = (j - 1) * nodes_ + i;
        lg[idx] = std::min(raw_log_rho_sq(k, j, i) - shift_, cap);
        w[idx] = std::exp(lg[idx]);
      }
    }
  }
}

double ControlWeights::raw_log_rho_sq(int i, std::size_t j, std::size_t node) const {
  const double t = grid_.time.midpoint(j) - grid_.time.start();
  return 2.0 * family_.log_rho(i, grid_.mesh->node(node), t);
}

double ControlWeights::chain_constant() const { return std::exp(-0.5 * family_.params().lambda); }

double chain_defect(const ControlWeights& weights) {
  const Grid& grid = weights.grid();
  const double log_c2 = 2.0 * std::log(weights.chain_constant());
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j <= grid.time.steps(); ++j) {
    for (std::size_t node = 0; node < grid.nodes(); ++node) {
      for (int i = 0; i < 3; ++i) {
        worst = std::max(worst, weights.log_weight(i + 1, j, node) - weights.log_weight(i, j, node) - log_c2);
      }
    }
  }
  return worst;
}

double weighted_norm_sq(const IntervalField& values, const ControlWeights& weights, int k,
                        std::span<const double> mask) {
  const SpaceMesh& mesh = *values.grid().mesh;
  double sum = 0.0;
  for (std::size_t j = 1; j <= values.intervals(); ++j) {
    for (std::size_t i = 0; i < values.nodes(); ++i) {
      const double v = values(j, i);
      if (v == 0.0) continue;
      const double m = mask.empty() ? 1.0 : mask[i];
      sum += mesh.volume(i) * m * weights.weight(k, j, i) * v * v;
    }
  }
  return values.grid().time.dt() * sum;
}

void WeightedControlConfig::validate() const {
  if (!(params.s > 0.0 && params.lambda > 0.0)) throw InvalidArgument("s and lambda must be positive");
  if (!(log_cap > 4.0 * params.lambda)) throw InvalidArgument("log_cap too small for lambda");
  if (!(cg_tol > 0.0 && cg_tol < 1.0)) throw InvalidArgument("cg_tol must lie in (0, 1)");
  if (cg_maxit <= 0) throw InvalidArgument("cg_maxit must be positive");
}

WeightedController::WeightedController(const ProblemSpec& spec, const Grid& grid, const WeightedControlConfig& cfg)
    : alpha_(spec.alpha),
      evolution_(spec, grid),
      mask_(omega_mask(*grid.mesh, spec.omega)),
      weights_(grid, cfg.params, cfg.log_cap),
      cfg_(cfg) {
  spec.validate();
  cfg.validate();
}

Field WeightedController::drive(const Field& control, const Field* g) const {
  Field source = control;
  for (std::size_t k = 0; k < source.levels(); ++k) {
    auto row = source.level(k);
    for (std::size_t i = 0; i < row.size(); ++i) row[i] *= mask_[i];
  }
  if (g) source += *g;
  return source;
}

double WeightedController::objective(std::span<const double> u0, const Field* g, const Field& control) const {
  const Field source = drive(control, g);
  const Field u = evolution_.forward(u0, &source);
  return 0.5 * weighted_norm_sq(right_values(control), weights_, 3, mask_) +
         0.5 * weighted_norm_sq(right_values(u), weights_, 1);
}

WeightedControlResult WeightedController::solve(std::span<const double> u0, const Field* g) const {
  const Grid& grid = evolution_.grid();
  const SpaceMesh& mesh = *grid.mesh;
  const std::size_t nodes = grid.nodes();
  const std::size_t levels = grid.levels();
  const double dt = grid.time.dt();

  const auto to_field = [&](const Vector& x) {
    Field f(grid);
    std::copy(x.begin(), x.end(), f.values().begin());
    return f;
  };
  // Gradient of 1/2 ||u||^2_{rho_1^2} with respect to the control, in the
  // masked inner product: v(t_{k-1}) with v the adjoint driven by W_1 u.
  const auto state_gradient = [&](const Field& u) {
    Field h(grid);
    for (std::size_t k = 1; k < levels; ++k) {
      for (std::size_t i = 0; i < nodes; ++i) h(k - 1, i) = weights_.weight(1, k, i) * u(k, i);
    }
    const std::vector<double> zero(nodes, 0.0);
    const Field v = evolution_.adjoint(zero, &h);
    Vector out(nodes * levels, 0.0);
    for (std::size_t k = 1; k < levels; ++k) {
      for (std::size_t i = 0; i < nodes; ++i) {
        if (mask_[i] > 0.0) out[k * nodes + i] = v(k - 1, i);
      }
    }
    return out;
  };

  const auto dot = [&](const Vector& a, const Vector& b) {
    double sum = 0.0;
    for (std::size_t k = 1; k < levels; ++k) {
      for (std::size_t i = 0; i < nodes; ++i) {
        const std::size_t idx = k * nodes + i;
        sum += mesh.volume(i) * mask_[i] * a[idx] * b[idx];
      }
    }
    return dt * sum;
  };
  const std::vector<double> zero(nodes, 0.0);
  const auto apply = [&](const Vector& q) {
    const Field control = to_field(q);
    const Field source = drive(control, nullptr);
    const Field u = evolution_.forward(zero, &source);
    Vector out = state_gradient(u);
    for (std::size_t k = 1; k < levels; ++k) {
      for (std::size_t i = 0; i < nodes; ++i) {
        if (mask_[i] > 0.0) out[k * nodes + i] += weights_.weight(3, k, i) * q[k * nodes + i];
      }
    }
    return out;
  };
  const auto precondition = [&](Vector& z) {
    for (std::size_t k = 1; k < levels; ++k) {
      for (std::size_t i = 0; i < nodes; ++i) {
        const std::size_t idx = k * nodes + i;
        z[idx] = mask_[i] > 0.0 ? z[idx] / weights_.weight(3, k, i) : 0.0;
      }
    }
  };

  WeightedControlResult result(grid);
  if (g) result.source = *g;
  result.u0.assign(u0.begin(), u0.end());
  result.u0.back() = 0.0;

  const Field free = evolution_.forward(result.u0, g);
  Vector rhs = state_gradient(free);
  for (double& r : rhs) r = -r;

  std::function<void(const Vector&)> track;
  if (cfg_.track_objective) {
    result.objective_trace.push_back(objective(result.u0, g, Field(grid)));
    track = [&](const Vector& x) { result.objective_trace.push_back(objective(result.u0, g, to_field(x))); };
  }

  Vector q(nodes * levels, 0.0);
  const CgOutcome cg = conjugate_gradient(apply, rhs, q, dot, cfg_.cg_tol, cfg_.cg_maxit, precondition, track);
  result.cg_iterations = cg.iterations;
  result.converged = cg.converged;
  if (!cg.converged) result.warnings.emplace_back("CG did not reach tolerance; returning best iterate");

  result.control = to_field(q);
  const Field source = drive(result.control, g);
  result.state = evolution_.forward(result.u0, &source);

  const IntervalField u_right = right_values(result.state);
  result.u_rho1_sq = weighted_norm_sq(u_right, weights_, 1);
  result.f_rho3_sq = weighted_norm_sq(right_values(result.control), weights_, 3, mask_);
  result.g_rho1_sq = weighted_norm_sq(right_values(result.source), weights_, 1);

  // L u - f 1_omega from the discrete operator; equals g up to rounding.
  IntervalField residual = time_difference(result.state);
  for (std::size_t j = 1; j <= residual.intervals(); ++j) {
    const std::vector<double> au = evolution_.op(j).apply(result.state.level(j));
    for (std::size_t i = 0; i + 1 < nodes; ++i) residual(j, i) += au[i] - mask_[i] * result.control(j, i);
    residual(j, nodes - 1) = 0.0;
  }
  result.residual_rho1_sq = weighted_norm_sq(residual, weights_, 1);
  result.u0_h1_sq = std::pow(profile_norm(alpha_, mesh, result.u0, NormKind::H1alpha), 2);
  result.e_norm_sq = result.u_rho1_sq + result.f_rho3_sq + result.residual_rho1_sq + result.u0_h1_sq;
  result.final_norm = vol_norm(mesh, result.state.level(levels - 1));
  result.objective = 0.5 * (result.f_rho3_sq + result.u_rho1_sq);
  return result;
}

WeightedControlResult solve_weighted_control(const ProblemSpec& spec, std::span<const double> u0, const Field* g,
                                             const WeightedControlConfig& cfg, const Grid& grid) {
  return WeightedController(spec, grid, cfg).solve(u0, g);
}

double transposition_check(const Evolution& evolution, const Field& u, const Field& source,
                           std::span<const double> u0, const std::vector<Probe>& probes) {
  const SpaceMesh& mesh = *evolution.grid().mesh;
  const std::size_t last = evolution.grid().time.steps();
  double worst = 0.0;
  for (const Probe& probe : probes) {
    const Field v = evolution.adjoint(probe.terminal, &probe.h);
    const double defect = observation_pairing(probe.h, u) + vol_dot(mesh, u.level(last), probe.terminal) -
                          vol_dot(mesh, u0, v.level(0)) - source_pairing(source, v);
    worst = std::max(worst, std::abs(defect));
  }
  return worst;
}

EstimateReport additional_estimates(const WeightedControlResult& result, const WeightedController& controller) {
  const ControlWeights& w = controller.weights();
  const Field& u = result.state;
  const SpaceMesh& mesh = u.mesh();
  const double alpha = controller.alpha();

  IntervalField grad(u.grid());
  IntervalField div(u.grid());
  for (std::size_t j = 1; j <= grad.intervals(); ++j) {
    const std::vector<double> g = nodal_gradient(mesh, u.level(j));
    const std::vector<double> d = flux_divergence(alpha, mesh, u.level(j));
    for (std::size_t i = 0; i < u.nodes(); ++i) {
      grad(j, i) = std::pow(mesh.node(i), 0.5 * alpha) * g[i];
      div(j, i) = d[i];
    }
  }
  EstimateReport r;
  r.lhs = weighted_norm_sq(grad, w, 2) + weighted_norm_sq(time_difference(u), w, 3) + weighted_norm_sq(div, w, 3);
  r.rhs = result.u_rho1_sq + result.f_rho3_sq + result.g_rho1_sq + result.u0_h1_sq;
  r.constant = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  return r;
}

SupremoReport supremo_check(const WeightedControlResult& result, const WeightedController& controller) {
  const ControlWeights& w = controller.weights();
  const AFamily& fam = w.family();
  const Field& u = result.state;
  const TimeGrid& time = u.time();
  const double lam = fam.params().lambda;

  SupremoReport r;
  const double beta = std::exp(2.0 * lam) - std::exp(lam);
  r.m_s = 0.5 * fam.params().s * beta;
  double best = 0.0;
  for (std::size_t j = 1; j <= time.steps(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < u.nodes(); ++i) mean += u.mesh().volume(i) * u(j, i);
    const double t = time.midpoint(j) - time.start();
    const double exponent = std::min(r.m_s / fam.m(t) - w.shift(), w.log_cap());
    best = std::max(best, std::exp(exponent) * mean * mean);
  }
  r.sup = best;
  r.e_norm_sq = result.e_norm_sq;
  r.ratio = r.e_norm_sq > 0.0 ? r.sup / r.e_norm_sq : 0.0;
  return r;
}

}  // namespace degenctrl
