#pragma once

namespace degenctrl {

/// Carleman large parameters (s, lambda).
struct CarlemanParams {
  double s = 1.0;
  double lambda = 1.0;
};

/// Configurable lower bounds standing in for the existential s0, lambda0.
struct ParamFloors {
  double s_min = 1.0;
  double lambda_min = 1.0;
};

/// Throws InvalidArgument when params fall below the floors.
void check_floors(const CarlemanParams& params, const ParamFloors& floors = {});

/// sup |eta| on [0, 1] for eta(x) = -x^2/2.
inline constexpr double kEtaSup = 0.5;

inline double eta(double x) { return -0.5 * x * x; }

struct SigmaValues {
  double theta;
  double xi;
  double sigma;
  double exp_m2s_sigma;
};

/// theta(t) = (t(T-t))^-4, xi = theta e^{lambda(2|eta| + eta)},
/// sigma = theta e^{4 lambda |eta|} - xi. Blows up at both t = 0 and t = T.
class SigmaFamily {
 public:
  SigmaFamily(double horizon, CarlemanParams params);

  [[nodiscard]] double horizon() const { return horizon_; }
  [[nodiscard]] const CarlemanParams& params() const { return params_; }

  [[nodiscard]] double theta(double t) const;
  [[nodiscard]] double log_theta(double t) const;
  [[nodiscard]] double log_xi(double x, double t) const;
  [[nodiscard]] double sigma(double x, double t) const;

  /// log(e^{-2 s sigma} xi^k). Returns -inf at t in {0, T}, where the
  /// product has limit 0 for every k <= 3.
  [[nodiscard]] double log_weight(double x, double t, double xi_power) const;

  /// Throws InvalidArgument for t outside [0, T] or x outside [0, 1].
  [[nodiscard]] SigmaValues eval(double x, double t) const;

 private:
  double horizon_;
  CarlemanParams params_;
};

SigmaValues eval_sigma_family(const CarlemanParams& params, double horizon, double x, double t);

/// Time profile m: plateau (T/2)^8 on [0, T/4], t^4 (T-t)^4 on [T/2, T], and a
/// C-infinity blend in between. Throws InvalidArgument for t outside [0, T].
double eval_m(double t, double horizon);

/// C-infinity step S(r) = e^{-1/r} / (e^{-1/r} + e^{-1/(1-r)}) on [0, 1].
double smooth_step(double r);

struct AValues {
  double tau;
  double zeta;
  double a;
  double rho[4];
};

/// tau = 1/m, zeta = tau e^{lambda(1+eta)}, A = tau (e^{2 lambda} - e^{lambda(1+eta)}),
/// rho_i = e^{sA} zeta^{-i}. Finite at t = 0, blows up as t -> T.
///
/// `profile_scale` multiplies m; 1 reproduces the plain family. The weighted
/// controller uses 1/m(0) so that tau(0) = 1 and the weights stay representable.
class AFamily {
 public:
  AFamily(double horizon, CarlemanParams params, double profile_scale = 1.0);

  /// Family with m rescaled by 1/m(0).
  static AFamily normalized(double horizon, CarlemanParams params);

  [[nodiscard]] double horizon() const { return horizon_; }
  [[nodiscard]] const CarlemanParams& params() const { return params_; }
  [[nodiscard]] double profile_scale() const { return profile_scale_; }

  [[nodiscard]] double m(double t) const;
  [[nodiscard]] double log_tau(double t) const;
  [[nodiscard]] double log_zeta(double x, double t) const;
  [[nodiscard]] double a(double x, double t) const;
  /// log rho_i. +inf at t = T.
  [[nodiscard]] double log_rho(int i, double x, double t) const;
  /// log(e^{-2sA} zeta^k); -inf at t = T.
  [[nodiscard]] double log_weight(double x, double t, double zeta_power) const;

  /// Throws InvalidArgument for t outside [0, T] or x outside [0, 1].
  [[nodiscard]] AValues eval(double x, double t) const;

  /// c with rho_3 <= c rho_2 <= c^2 rho_1 <= c^3 rho_0: (max m) e^{-lambda/2}.
  [[nodiscard]] double chain_constant() const;

 private:
  double horizon_;
  CarlemanParams params_;
  double profile_scale_;
};

AValues eval_a_family(const CarlemanParams& params, double horizon, double x, double t);

}  // namespace degenctrl
