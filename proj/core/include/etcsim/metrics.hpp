#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "etcsim/scenario.hpp"
#include "etcsim/trace.hpp"

namespace etcsim {

/// Finite-horizon information transmission rate: sum of g over the first N
/// packets divided by the sum of the N following inter-send intervals.
struct RateReport {
  std::optional<double> R_s;  // absent with fewer than two sends
  double total_bits = 0.0;
  double total_time = 0.0;
  std::size_t trigger_count = 0;
  std::optional<double> mean_interval;
  std::optional<double> min_interval;
  std::size_t violation_count = 0;
  double max_abs_z = 0.0;
};

/// Rate over a set of send events (any order; they are sorted by time).
RateReport compute_rate(std::span<const SendEvent> sends);
/// Rate plus envelope statistics for a trace.
RateReport compute_rate(const SimTrace& trace);

/// lambda1 / ln 2 (bits/s).
double entropy_rate_linear(double lambda1);

/// Entropy-rate references for the built-in plants.
struct EntropyReference {
  /// h(x) = 2 + cos(x) for the demo map.
  static double demo_pointwise(double x);
  /// inf_x h(x) for the demo map (= 1).
  static double demo_lower_bound();
};

struct EnvelopeCheck {
  std::string name;
  double bound = 0.0;
  double slack = 0.0;
  double max_observed = 0.0;
  double max_excess = 0.0;  // largest observed - (bound + slack); negative when all samples pass
  std::size_t samples = 0;
  std::size_t violations = 0;

  [[nodiscard]] bool ok() const noexcept { return violations == 0; }
};

struct EnvelopeReport {
  std::vector<EnvelopeCheck> checks;

  [[nodiscard]] std::size_t total_violations() const;
  [[nodiscard]] bool ok() const { return total_violations() == 0; }
  [[nodiscard]] const EnvelopeCheck* find(std::string_view name) const;
};

/// Checks a trace against its bounds:
///   "global"    |z(t)| <= envelope + slack at every step and reception instant
///   "reception" |z(t_c+)| <= jump_bound + slack
///   "sampling"  |z(t_s^k)| <= Upsilon(0) + slack at every candidate (nonlinear)
///   "zeno"      every inter-send interval is >= alpha + gamma (nonlinear)
/// The global check falls back to trace.max_abs_z when steps were not recorded.
EnvelopeReport verify_envelopes(const SimTrace& trace, const SchemeBounds& bounds);

}  // namespace etcsim
