#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "config.hpp"
#include "degenctrl/grid.hpp"
#include "degenctrl/report_io.hpp"

namespace degenctrl::cli {

struct RunOutcome {
  CsvTable report{{}};
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> violations;  // invariant failures, exit 2
  std::vector<std::string> unconverged;  // solver non-convergence, exit 3
  std::vector<std::pair<std::string, Field>> fields;
};

/// Runs one experiment. Independent sweep points are spread over `jobs`
/// threads; rows come out in sweep order regardless of the schedule.
RunOutcome run_experiment(const ExperimentConfig& cfg, int jobs);

/// Calls fn(i) for i in [0, count) on up to `jobs` threads and returns the
/// results in index order. The first exception by index is rethrown.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, int jobs, Fn fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(count, jobs > 1 ? static_cast<std::size_t>(jobs) : 1);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<T> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

}  // namespace degenctrl::cli
