#pragma once

#include <functional>
#include <string>
#include <vector>

#include "degenctrl/grid.hpp"
#include "degenctrl/nonlinear.hpp"

namespace degenctrl::catalog {

/// Coefficient fields b(x, t) for b0 and b1:
///   zero, constant (c), linear (c x), sin (c sin(pi x) cos(pi t)).
SpaceTimeFunction coefficient(const std::string& name, double scale);

/// Semilinear terms g(x, t, r, q) with partials and K:
///   zero, linear (c r), arctan (c atan r), sin_gradient (c x^{a/2} sin q).
SemilinearSpec nonlinearity(const std::string& name, double scale, double alpha);

/// Nonlocal diffusion factors: one (ell = 1), affine (ell = 1 + c r).
NonlocalSpec nonlocal(const std::string& name, double slope);

/// Initial profiles scaled by `scale`: zero, one_minus_x, cos (cos(pi x / 2)),
/// bump (sin^2(pi x) on [0, 1]).
std::function<double(double)> profile(const std::string& name, double scale);

/// Exact solution e^{-t}(1 - x) of the linear problem with b0 = b1 = 0 and
/// its source f = u_t - (x^a u_x)_x.
double manufactured_solution(double x, double t);
double manufactured_source(double alpha, double x, double t);

std::vector<std::string> coefficient_names();
std::vector<std::string> nonlinearity_names();
std::vector<std::string> nonlocal_names();
std::vector<std::string> profile_names();

}  // namespace degenctrl::catalog
