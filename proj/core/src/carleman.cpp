#include "degenctrl/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "degenctrl/errors.hpp"

namespace degenctrl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// The backward implicit step makes v(t_{j-1}) the natural sample on interval j.
IntervalField left_values(const Field& field) {
  IntervalField out(field.grid());
  for (std::size_t j = 1; j <= out.intervals(); ++j) {
    const auto src = field.level(j - 1);
    std::copy(src.begin(), src.end(), out.interval(j).begin());
  }
  return out;
}

struct AdjointSamples {
  IntervalField v;
  IntervalField v_t;
  IntervalField div;
  IntervalField grad;  // x^{a/2} v_x
  IntervalField v_omega;
  IntervalField h;
  std::vector<double> initial;
};

AdjointSamples sample_adjoint(const ProblemSpec& spec, const Grid& grid, std::span<const double> terminal,
                              const Field* h) {
  if (terminal.size() != grid.nodes()) throw InvalidArgument("terminal datum has the wrong length");
  const Evolution evolution(spec, grid);
  const Field v = evolution.adjoint(terminal, h);
  const SpaceMesh& mesh = *grid.mesh;
  const std::vector<double> mask = omega_mask(mesh, spec.omega);

  AdjointSamples s{left_values(v), time_difference(v), IntervalField(grid), IntervalField(grid),
                   IntervalField(grid), IntervalField(grid), {}};
  for (std::size_t j = 1; j <= s.v.intervals(); ++j) {
    const auto level = v.level(j - 1);
    const std::vector<double> d = flux_divergence(spec.alpha, mesh, level);
    const std::vector<double> g = nodal_gradient(mesh, level);
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      s.div(j, i) = d[i];
      s.grad(j, i) = std::pow(mesh.node(i), 0.5 * spec.alpha) * g[i];
      s.v_omega(j, i) = std::sqrt(mask[i]) * level[i];
      if (h) s.h(j, i) = (*h)(j - 1, i);
    }
  }
  const auto first = v.level(0);
  s.initial.assign(first.begin(), first.end());
  return s;
}

template <typename LogWeight>
CarlemanReport assemble_report(WeightFamily family, CarlemanParams params, const AdjointSamples& s,
                               const LogWeight& log_weight, double omega_power) {
  const double ls = std::log(params.s);
  const double ll = std::log(params.lambda);
  const auto weighted = [&](double log_factor, double power) {
    return [=, &log_weight](double x, double t) {
      const double w = log_weight(x, t, power);
      return w == kNegInf ? kNegInf : log_factor + w;
    };
  };

  CarlemanReport r;
  r.family = family;
  r.params = params;
  r.log_lhs_terms[0] = log_integrate_qt(s.v_t, weighted(-ls - ll, -1.0));
  r.log_lhs_terms[1] = log_integrate_qt(s.div, weighted(-ls - ll, -1.0));
  r.log_lhs_terms[2] = log_integrate_qt(s.grad, weighted(ls + 2.0 * ll, 1.0));
  r.log_lhs_terms[3] = log_integrate_qt(s.v, weighted(3.0 * ls + 4.0 * ll, 3.0));
  r.log_rhs_terms[0] = log_integrate_qt(s.h, weighted(0.0, 0.0));
  r.log_rhs_terms[1] = log_integrate_qt(s.v_omega, weighted(3.0 * ls + 4.0 * ll, omega_power));

  LogSum lhs;
  for (double t : r.log_lhs_terms) lhs.add(t);
  LogSum rhs;
  for (double t : r.log_rhs_terms) rhs.add(t);
  r.log_lhs = lhs.value();
  r.log_rhs = rhs.value();

  if (r.log_rhs == kNegInf) {
    r.status = r.log_lhs == kNegInf ? RatioStatus::zero_over_zero : RatioStatus::violation;
    r.ratio = std::numeric_limits<double>::quiet_NaN();
    r.log_ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.log_ratio = r.log_lhs - r.log_rhs;
    r.ratio = std::exp(r.log_ratio);
  }
  return r;
}

std::pair<double, double> observation_logs(const AdjointSamples& s, const SpaceMesh& mesh,
                                           const std::function<double(double, double)>& log_weight) {
  const double numerator = vol_dot(mesh, s.initial, s.initial);
  return {numerator > 0.0 ? std::log(numerator) : kNegInf, log_integrate_qt(s.v_omega, log_weight)};
}

}  // namespace

std::string to_string(WeightFamily family) { return family == WeightFamily::sigma ? "sigma" : "a"; }

std::string to_string(RatioStatus status) {
  switch (status) {
    case RatioStatus::ok:
      return "ok";
    case RatioStatus::zero_over_zero:
      return "zero_over_zero";
    case RatioStatus::violation:
      return "violation";
  }
  return "unknown";
}

double CarlemanReport::lhs_term(std::size_t i) const { return std::exp(log_lhs_terms.at(i)); }
double CarlemanReport::rhs_term(std::size_t i) const { return std::exp(log_rhs_terms.at(i)); }

CarlemanReport carleman_sigma(const ProblemSpec& spec, const Grid& grid, std::span<const double> terminal,
                              const Field* h, CarlemanParams params) {
  spec.validate();
  check_floors(params);
  const AdjointSamples s = sample_adjoint(spec, grid, terminal, h);
  const SigmaFamily family(grid.time.end(), params);
  const auto lw = [&family](double x, double t, double k) { return family.log_weight(x, t, k); };
  return assemble_report(WeightFamily::sigma, params, s, lw, 3.0);
}

CarlemanReport carleman_a(const ProblemSpec& spec, const Grid& grid, std::span<const double> terminal,
                          const Field* h, CarlemanParams params) {
  spec.validate();
  check_floors(params);
  for (std::size_t k = 0; k <= grid.time.steps(); ++k) {
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
      const double x = grid.mesh->node(i);
      const double t = grid.time.instant(k);
      if (spec.b0(x, t) != 0.0 || spec.b1(x, t) != 0.0) {
        throw InvalidArgument("the A-family estimate needs b0 = b1 = 0");
      }
    }
  }
  const AdjointSamples s = sample_adjoint(spec, grid, terminal, h);
  const AFamily family(grid.time.end(), params);
  const auto lw = [&family](double x, double t, double k) { return family.log_weight(x, t, k); };
  return assemble_report(WeightFamily::a, params, s, lw, 6.0);
}

ObservabilityReport observability_constant(const ProblemSpec& spec, const Grid& grid,
                                           std::span<const double> terminal, CarlemanParams params,
                                           WeightFamily family) {
  spec.validate();
  check_floors(params);
  const AdjointSamples s = sample_adjoint(spec, grid, terminal, nullptr);
  std::pair<double, double> logs;
  if (family == WeightFamily::sigma) {
    const SigmaFamily f(grid.time.end(), params);
    logs = observation_logs(s, *grid.mesh, [&f](double x, double t) { return f.log_weight(x, t, 3.0); });
  } else {
    const AFamily f(grid.time.end(), params);
    const double factor = 3.0 * std::log(params.s) + 4.0 * std::log(params.lambda);
    logs = observation_logs(s, *grid.mesh, [&f, factor](double x, double t) {
      const double w = f.log_weight(x, t, 6.0);
      return w == kNegInf ? kNegInf : factor + w;
    });
  }
  ObservabilityReport r;
  r.log_numerator = logs.first;
  r.log_denominator = logs.second;
  if (r.log_denominator == kNegInf) {
    r.status = r.log_numerator == kNegInf ? RatioStatus::zero_over_zero : RatioStatus::violation;
    r.log_constant = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.log_constant = r.log_numerator - r.log_denominator;
  }
  return r;
}

std::vector<double> random_terminal(const SpaceMesh& mesh, std::uint64_t seed, int modes) {
  if (modes <= 0) throw InvalidArgument("modes must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> c(static_cast<std::size_t>(modes));
  for (double& ck : c) ck = normal(rng);

  std::vector<double> v(mesh.size(), 0.0);
  for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
    for (int k = 0; k < modes; ++k) {
      v[i] += c[static_cast<std::size_t>(k)] * std::cos((k + 0.5) * std::numbers::pi * mesh.node(i));
    }
  }
  const double norm = vol_norm(mesh, v);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
  return v;
}

EmpiricalConstant empirical_carleman_constant(const ProblemSpec& spec, const Grid& grid, CarlemanParams params,
                                              WeightFamily family, int draws, std::uint64_t seed) {
  EmpiricalConstant out;
  for (int d = 0; d < draws; ++d) {
    const std::vector<double> vt = random_terminal(*grid.mesh, seed + static_cast<std::uint64_t>(d));
    const CarlemanReport r = family == WeightFamily::sigma ? carleman_sigma(spec, grid, vt, nullptr, params)
                                                           : carleman_a(spec, grid, vt, nullptr, params);
    ++out.draws;
    if (r.status != RatioStatus::ok || !std::isfinite(r.ratio)) {
      ++out.non_finite;
      continue;
    }
    out.max_ratio = std::max(out.max_ratio, r.ratio);
    out.max_log_ratio = std::max(out.max_log_ratio, r.log_ratio);
  }
  return out;
}

double empirical_log_observability(const ProblemSpec& spec, const Grid& grid, CarlemanParams params,
                                   WeightFamily family, int draws, std::uint64_t seed) {
  double best = -std::numeric_limits<double>::infinity();
  for (int d = 0; d < draws; ++d) {
    const std::vector<double> vt = random_terminal(*grid.mesh, seed + static_cast<std::uint64_t>(d));
    const ObservabilityReport r = observability_constant(spec, grid, vt, params, family);
    if (r.status == RatioStatus::ok) best = std::max(best, r.log_constant);
  }
  return best;
}

}  // namespace degenctrl
