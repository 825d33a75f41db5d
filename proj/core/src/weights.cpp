#include "degenctrl/weights.hpp"

#include <cmath>
#include <limits>

#include "degenctrl/errors.hpp"

namespace degenctrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_point(double x, double t, double horizon) {
  if (!(t >= 0.0 && t <= horizon)) throw InvalidArgument("t outside [0, T]");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("x outside [0, 1]");
}

}  // namespace

void check_floors(const CarlemanParams& params, const ParamFloors& floors) {
  if (!(params.s >= floors.s_min)) throw InvalidArgument("s below its floor");
  if (!(params.lambda >= floors.lambda_min)) throw InvalidArgument("lambda below its floor");
}

SigmaFamily::SigmaFamily(double horizon, CarlemanParams params) : horizon_(horizon), params_(params) {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  if (!(params.s > 0.0) || !(params.lambda >= 0.0)) throw InvalidArgument("invalid Carleman parameters");
}

double SigmaFamily::theta(double t) const { return std::exp(log_theta(t)); }

double SigmaFamily::log_theta(double t) const {
  const double p = t * (horizon_ - t);
  if (p <= 0.0) return kInf;
  return -4.0 * std::log(p);
}

double SigmaFamily::log_xi(double x, double t) const {
  return log_theta(t) + params_.lambda * (2.0 * kEtaSup + eta(x));
}

double SigmaFamily::sigma(double x, double t) const {
  // theta (e^{2 lambda} - e^{lambda(1+eta)}) = theta e^{lambda(1+eta)} expm1(lambda(1-eta)).
  const double lam = params_.lambda;
  const double lt = log_theta(t);
  if (lt == kInf) return lam > 0.0 ? kInf : 0.0;
  return std::exp(lt + lam * (1.0 + eta(x))) * std::expm1(lam * (1.0 - eta(x)));
}

double SigmaFamily::log_weight(double x, double t, double xi_power) const {
  if (t <= 0.0 || t >= horizon_) return -kInf;
  return -2.0 * params_.s * sigma(x, t) + xi_power * log_xi(x, t);
}

SigmaValues SigmaFamily::eval(double x, double t) const {
  check_point(x, t, horizon_);
  SigmaValues v{};
  v.theta = theta(t);
  v.xi = std::exp(log_xi(x, t));
  v.sigma = sigma(x, t);
  v.exp_m2s_sigma = (t <= 0.0 || t >= horizon_) ? 0.0 : std::exp(-2.0 * params_.s * v.sigma);
  return v;
}

SigmaValues eval_sigma_family(const CarlemanParams& params, double horizon, double x, double t) {
  return SigmaFamily(horizon, params).eval(x, t);
}

double smooth_step(double r) {
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / r);
  const double b = std::exp(-1.0 / (1.0 - r));
  return a / (a + b);
}

double eval_m(double t, double horizon) {
  if (!(t >= 0.0 && t <= horizon)) throw InvalidArgument("t outside [0, T]");
  const double plateau = std::pow(0.5 * horizon, 8);
  const double poly = std::pow(t * (horizon - t), 4);
  const double quarter = 0.25 * horizon;
  if (t <= quarter) return plateau;
  if (t >= 2.0 * quarter) return poly;
  const double s = smooth_step((t - quarter) / quarter);
  return (1.0 - s) * plateau + s * poly;
}

AFamily::AFamily(double horizon, CarlemanParams params, double profile_scale)
    : horizon_(horizon), params_(params), profile_scale_(profile_scale) {
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  if (!(params.s > 0.0) || !(params.lambda >= 0.0)) throw InvalidArgument("invalid Carleman parameters");
  if (!(profile_scale > 0.0)) throw InvalidArgument("profile scale must be positive");
}

AFamily AFamily::normalized(double horizon, CarlemanParams params) {
  return AFamily(horizon, params, 1.0 / eval_m(0.0, horizon));
}

double AFamily::m(double t) const { return profile_scale_ * eval_m(t, horizon_); }

double AFamily::log_tau(double t) const {
  const double mt = m(t);
  if (mt <= 0.0) return kInf;
  return -std::log(mt);
}

double AFamily::log_zeta(double x, double t) const {
  return log_tau(t) + params_.lambda * (1.0 + eta(x));
}

double AFamily::a(double x, double t) const {
  const double lam = params_.lambda;
  const double lt = log_tau(t);
  if (lt == kInf) return lam > 0.0 ? kInf : 0.0;
  // tau e^{lambda(1+eta)} expm1(lambda(1-eta)), positive for lambda > 0.
  return std::exp(lt + lam * (1.0 + eta(x))) * std::expm1(lam * (1.0 - eta(x)));
}

double AFamily::log_rho(int i, double x, double t) const {
  const double lz = log_zeta(x, t);
  if (lz == kInf) return kInf;
  return params_.s * a(x, t) - static_cast<double>(i) * lz;
}

double AFamily::log_weight(double x, double t, double zeta_power) const {
  const double lz = log_zeta(x, t);
  if (lz == kInf) return -kInf;
  return -2.0 * params_.s * a(x, t) + zeta_power * lz;
}

AValues AFamily::eval(double x, double t) const {
  check_point(x, t, horizon_);
  AValues v{};
  const double lt = log_tau(t);
  if (lt == kInf) {
    v.tau = kInf;
    v.zeta = kInf;
    v.a = params_.lambda > 0.0 ? kInf : 0.0;
    for (double& r : v.rho) r = kInf;
    return v;
  }
  v.tau = std::exp(lt);
  const double lz = log_zeta(x, t);
  v.zeta = std::exp(lz);
  v.a = a(x, t);
  const double esa = std::exp(params_.s * v.a);
  const double inv_zeta = std::exp(-lz);
  double r = esa;
  for (double& rho : v.rho) {
    rho = r;
    r *= inv_zeta;
  }
  return v;
}

double AFamily::chain_constant() const {
  return profile_scale_ * std::pow(0.5 * horizon_, 8) * std::exp(-0.5 * params_.lambda);
}

AValues eval_a_family(const CarlemanParams& params, double horizon, double x, double t) {
  return AFamily(horizon, params).eval(x, t);
}

}  // namespace degenctrl
