#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "config.hpp"
#include "degenctrl/errors.hpp"
#include "runner.hpp"

namespace fs = std::filesystem;
using degenctrl::cli::ConfigError;
using degenctrl::cli::ExperimentConfig;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitViolation = 2;
constexpr int kExitUnconverged = 3;

std::string compiler_id() {
#if defined(__clang__)
  return "clang " __clang_version__;
#elif defined(__GNUC__)
  return "gcc " __VERSION__;
#else
  return "unknown";
#endif
}

ExperimentConfig load_with_env(const std::string& path) {
  ExperimentConfig cfg = degenctrl::cli::load_config(path);
  if (const char* env = std::getenv("DEGENCTRL_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long seed = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      cfg.seed = seed;
    } catch (const std::exception&) {
      throw ConfigError(std::string("DEGENCTRL_SEED: not an unsigned integer: ") + env);
    }
  }
  degenctrl::cli::validate_config(cfg);
  return cfg;
}

int cmd_validate(const std::string& path) {
  try {
    (void)load_with_env(path);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kExitConfig;
  }
}

int cmd_run(const std::string& path, int jobs, const std::string& out_override) {
  ExperimentConfig cfg;
  try {
    cfg = load_with_env(path);
  } catch (const std::exception& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kExitConfig;
  }
  if (!out_override.empty()) cfg.output = out_override;
  const fs::path out_dir(cfg.output);

  const auto start = std::chrono::steady_clock::now();
  degenctrl::cli::RunOutcome outcome;
  std::vector<std::string> warnings;
  std::string status = "ok";
  int code = kExitOk;
  try {
    outcome = degenctrl::cli::run_experiment(cfg, jobs);
    if (!outcome.violations.empty()) {
      status = "violation";
      code = kExitViolation;
    } else if (!outcome.unconverged.empty()) {
      status = "not_converged";
      code = kExitUnconverged;
    }
  } catch (const degenctrl::SolverFailure& e) {
    status = "not_converged";
    code = kExitUnconverged;
    outcome.unconverged.emplace_back(e.what());
  } catch (const std::exception& e) {
    status = "violation";
    code = kExitViolation;
    outcome.violations.emplace_back(e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "cannot create " << out_dir.string() << ": " << ec.message() << '\n';
    return kExitConfig;
  }
  outcome.report.write(out_dir / "report.csv");
  for (const auto& [name, field] : outcome.fields) {
    degenctrl::write_field_csv(out_dir / ("field_" + name + ".csv"), field);
  }

  for (const auto& v : outcome.violations) warnings.push_back("violation: " + v);
  for (const auto& u : outcome.unconverged) warnings.push_back("not converged: " + u);

  json meta;
  meta["config"] = cfg.resolved();
  meta["version"] = DEGENCTRL_VERSION;
  meta["compiler"] = compiler_id();
  meta["wall_time_s"] = wall;
  meta["seed"] = cfg.seed;
  meta["jobs"] = jobs;
  meta["status"] = status;
  meta["exit_code"] = code;
  meta["summary"] = outcome.summary;
  meta["warnings"] = warnings;
  std::ofstream(out_dir / "meta.json") << meta.dump(2) << '\n';

  for (const auto& w : warnings) std::cerr << w << '\n';
  std::cout << "wrote " << (out_dir / "report.csv").string() << " (" << outcome.report.rows() << " rows, status "
            << status << ")\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controllability experiments for degenerate parabolic equations"};
  app.require_subcommand(1);

  std::string config_path;
  int jobs = 1;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--jobs,-j", jobs, "Worker threads for independent sweep points")->check(CLI::PositiveNumber);
  run->add_option("--out,-o", out_dir, "Output directory (overrides the config)");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", validate_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return cmd_run(config_path, jobs, out_dir);
  return cmd_validate(validate_path);
}
