#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "degenctrl/evolution.hpp"
#include "degenctrl/grid.hpp"

namespace degenctrl::cli {

/// Bad configuration: unparseable JSON, a wrong type, an unknown key or a
/// value that fails validation. The message names the line or the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
  forward_convergence,
  carleman_sweep,
  observability,
  hum,
  weighted,
  semilinear,
  nonlocal,
  window_study,
};

std::string to_string(ExperimentKind kind);

struct Choice {
  std::string name = "zero";
  double scale = 0.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::hum;

  double alpha = 2.0;
  double horizon = 1.0;
  Interval omega{0.0, 0.3};
  bool geometric = true;
  Choice b0;
  Choice b1;
  Choice u0{"one_minus_x", 1.0};

  std::vector<std::size_t> sizes{64};
  /// Time steps per size; empty means m = n.
  std::vector<std::size_t> steps;
  double grading = 2.0;

  std::vector<double> s_values{2.0};
  std::vector<double> lambda_values{2.0};  // 1 for weighted and nonlocal runs
  std::string family = "sigma";
  int draws = 50;

  std::vector<double> epsilons{1e-4};
  double hum_cg_tol = 1e-10;
  int hum_cg_maxit = 4000;

  double log_cap = 17.0;
  double weighted_cg_tol = 1e-10;
  int weighted_cg_maxit = 3000;

  Choice g{"zero", 0.0};
  Choice ell{"one", 0.0};
  double picard_tol = -1.0;  // negative: the solver default for the kind
  int picard_max_iterations = 30;
  double radius = -1.0;  // negative: no limit

  std::vector<Interval> windows{{0.0, 0.3}, {0.5, 0.8}};

  std::string output = "degenctrl-out";
  std::uint64_t seed = 1;
  bool dump_fields = false;

  [[nodiscard]] ProblemSpec problem() const;
  [[nodiscard]] std::size_t steps_for(std::size_t index) const;
  [[nodiscard]] double effective_picard_tol() const;
  /// Every field with defaults filled in.
  [[nodiscard]] nlohmann::json resolved() const;
};

/// Throws ConfigError with a line number for syntax errors and the dotted
/// field path for type or value errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Invariant checks only; no computation. Throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

}  // namespace degenctrl::cli
