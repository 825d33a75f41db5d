#include "degenctrl/catalog.hpp"

#include <cmath>
#include <numbers>

#include "degenctrl/errors.hpp"

namespace degenctrl::catalog {

namespace {

[[noreturn]] void unknown(const std::string& kind, const std::string& name, const std::vector<std::string>& known) {
  std::string list;
  for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
  throw InvalidArgument("unknown " + kind + " '" + name + "' (known: " + list + ")");
}

}  // namespace

std::vector<std::string> coefficient_names() { return {"zero", "constant", "linear", "sin"}; }
std::vector<std::string> nonlinearity_names() { return {"zero", "linear", "arctan", "sin_gradient"}; }
std::vector<std::string> nonlocal_names() { return {"one", "affine"}; }
std::vector<std::string> profile_names() { return {"zero", "one_minus_x", "cos", "bump"}; }

SpaceTimeFunction coefficient(const std::string& name, double c) {
  if (name == "zero") return [](double, double) { return 0.0; };
  if (name == "constant") return [c](double, double) { return c; };
  if (name == "linear") return [c](double x, double) { return c * x; };
  if (name == "sin") {
    return [c](double x, double t) { return c * std::sin(std::numbers::pi * x) * std::cos(std::numbers::pi * t); };
  }
  unknown("coefficient", name, coefficient_names());
}

SemilinearSpec nonlinearity(const std::string& name, double c, double alpha) {
  SemilinearSpec s;
  if (name == "zero") return s;
  s.lipschitz = std::abs(c);
  if (name == "linear") {
    s.g = [c](double, double, double r, double) { return c * r; };
    s.g_r = [c](double, double, double, double) { return c; };
    return s;
  }
  if (name == "arctan") {
    s.g = [c](double, double, double r, double) { return c * std::atan(r); };
    s.g_r = [c](double, double, double r, double) { return c / (1.0 + r * r); };
    return s;
  }
  if (name == "sin_gradient") {
    const double half = 0.5 * alpha;
    s.g = [c, half](double x, double, double, double q) { return c * std::pow(x, half) * std::sin(q); };
    s.g_q = [c, half](double x, double, double, double q) { return c * std::pow(x, half) * std::cos(q); };
    return s;
  }
  unknown("nonlinearity", name, nonlinearity_names());
}

NonlocalSpec nonlocal(const std::string& name, double slope) {
  NonlocalSpec s;
  if (name == "one") return s;
  if (name == "affine") {
    s.ell = [slope](double r) { return 1.0 + slope * r; };
    s.ell_prime = [slope](double) { return slope; };
    s.lipschitz = std::abs(slope);
    return s;
  }
  unknown("nonlocal factor", name, nonlocal_names());
}

std::function<double(double)> profile(const std::string& name, double scale) {
  if (name == "zero") return [](double) { return 0.0; };
  if (name == "one_minus_x") return [scale](double x) { return scale * (1.0 - x); };
  if (name == "cos") return [scale](double x) { return scale * std::cos(0.5 * std::numbers::pi * x); };
  if (name == "bump") {
    return [scale](double x) {
      const double s = std::sin(std::numbers::pi * x);
      return scale * s * s;
    };
  }
  unknown("profile", name, profile_names());
}

double manufactured_solution(double x, double t) { return std::exp(-t) * (1.0 - x); }

double manufactured_source(double alpha, double x, double t) {
  return std::exp(-t) * (alpha * std::pow(x, alpha - 1.0) - (1.0 - x));
}

}  // namespace degenctrl::catalog
