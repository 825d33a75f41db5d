#pragma once

#include <string>
#include <vector>

namespace degenctrl {

struct ConvergenceRow {
  std::string sweep;  // "time" or "space"
  std::size_t n = 0;
  std::size_t m = 0;
  double error = 0.0;
  double order = 0.0;  // 0 on the first row of each sweep
};

/// Observed orders for the manufactured solution u = e^{-t}(1 - x).
///
/// Time: n fixed at the largest size, m over `sizes`, error |u_h(T) - u(T)|.
/// Space: m fixed at the smallest size, n over `sizes`, with the self-convergence
/// differences |u_n(T) - u_{2n}(T)| on the coarse nodes (graded meshes nest).
/// The time error dominates the exact-solution error, hence the split.
/// `sizes` must be increasing and, for the space sweep, successive doublings.
std::vector<ConvergenceRow> manufactured_convergence(double alpha, double horizon,
                                                     const std::vector<std::size_t>& sizes, double grading);

}  // namespace degenctrl
