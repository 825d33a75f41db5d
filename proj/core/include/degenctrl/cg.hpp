#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace degenctrl {

struct CgOutcome {
  int iterations = 0;
  double residual = 0.0;          // final ||r|| in the caller's inner product
  double initial_residual = 0.0;  // ||b - A x0||
  bool converged = false;
};

using Vector = std::vector<double>;

/// Preconditioned conjugate gradients for a self-adjoint positive (semi)definite
/// operator in the inner product `dot`. `precondition` applies M^{-1} in place;
/// pass nullptr for plain CG. Stops when ||r|| <= tol * ||b||. `on_iterate`, if
/// set, sees every iterate.
inline CgOutcome conjugate_gradient(const std::function<Vector(const Vector&)>& apply, const Vector& rhs,
                                    Vector& x, const std::function<double(const Vector&, const Vector&)>& dot,
                                    double tol, int max_iterations,
                                    const std::function<void(Vector&)>& precondition = nullptr,
                                    const std::function<void(const Vector&)>& on_iterate = nullptr) {
  CgOutcome out;
  const std::size_t n = rhs.size();
  if (x.size() != n) x.assign(n, 0.0);

  Vector r = rhs;
  {
    const Vector ax = apply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] -= ax[i];
  }
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  out.initial_residual = std::sqrt(dot(r, r));
  out.residual = out.initial_residual;
  const double target = tol * rhs_norm;
  if (out.residual <= target || rhs_norm == 0.0) {
    out.converged = true;
    return out;
  }

  Vector z = r;
  if (precondition) precondition(z);
  Vector p = z;
  double rz = dot(r, z);
  while (out.iterations < max_iterations) {
    const Vector q = apply(p);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) break;
    const double step = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * q[i];
    }
    ++out.iterations;
    if (on_iterate) on_iterate(x);
    out.residual = std::sqrt(dot(r, r));
    if (out.residual <= target) {
      out.converged = true;
      break;
    }
    z = r;
    if (precondition) precondition(z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return out;
}

}  // namespace degenctrl
