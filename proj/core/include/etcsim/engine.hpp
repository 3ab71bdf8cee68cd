#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etcsim/metrics.hpp"
#include "etcsim/scenario.hpp"
#include "etcsim/trace.hpp"

namespace etcsim {

/// |x| above this aborts the run as diverged.
inline constexpr double kDivergenceThreshold = 1e6;

struct RunOptions {
  bool record_steps = true;
};

/// Runs the closed loop for horizon / delta steps. Each step, in order:
///   1. deliver a packet if its delay has elapsed; decode and jump xhat
///   2. compute u from xhat
///   3. the sensor evaluates the trigger rule and possibly sends
///   4. sample the disturbance
///   5. advance the plant and the estimator by one step
/// Deterministic for a fixed scenario (including its seed). The disturbance
/// stream uses derive_seed(seed, 0); the channel uses
/// derive_seed(seed ^ channel.seed, 1).
SimTrace run(const ResolvedScenario& scenario, const RunOptions& options = {});
SimTrace run(const Scenario& scenario, const RunOptions& options = {});

struct SweepPoint {
  double gamma_requested = 0.0;
  double gamma = 0.0;  // after rounding to the grid
  bool feasible = false;
  std::string skip_reason;
  int bits = 0;
  double J = 0.0;
  std::size_t runs = 0;
  RateReport rate;              // pooled over all seeds
  double entropy_reference = 0.0;
  double max_abs_z = 0.0;
  std::size_t violations = 0;
  std::size_t failed_runs = 0;  // diverged or aborted
  std::vector<std::string> warnings;
};

/// Runs the template at every gamma in the grid for every seed. Infeasible
/// grid points are reported and skipped. Runs execute on `threads` workers
/// (0 = hardware concurrency); results do not depend on the thread count.
std::vector<SweepPoint> sweep(const Scenario& base, std::span<const double> gammas,
                              std::span<const std::uint64_t> seeds, unsigned threads = 0);

/// `count` evenly spaced values from start to stop inclusive.
std::vector<double> linspace(double start, double stop, std::size_t count);

/// Runs fn(i) for i in [0, n) on a pool of worker threads.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace etcsim
