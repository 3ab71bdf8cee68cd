#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "etcsim/nonlinear_etc.hpp"
#include "etcsim/scenario.hpp"
#include "etcsim/trace.hpp"

namespace etcsim {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationOptions {
  std::size_t runs = 200;  // seeded runs per built-in scenario
  unsigned threads = 0;
};

/// Runs every invariant of every module against the built-in scenarios.
std::vector<ValidationCheck> run_validation(const ValidationOptions& options = {});

/// Protocol properties visible in a trace: 0 < t_c - t_s <= gamma for every
/// reception, at most one packet in flight, receptions matched to sends.
/// Returns the number of violations; `detail` receives the first one.
std::size_t check_protocol(const SimTrace& trace, std::string* detail = nullptr);

struct Lemma1Report {
  std::size_t windows = 0;   // reception windows inspected
  std::size_t samples = 0;
  std::size_t violations = 0;
  double max_excess = 0.0;
};

/// For each reception k, finds tbar^k, the first step in (t_s^{k-1}, t_s^k]
/// with |z| >= J, and checks |z(t)| <= Upsilon_w(t - t_s^k) + slack on
/// [tbar^k, t_c^k). Needs recorded steps.
Lemma1Report lemma1_harness(const SimTrace& trace, const NonlinearTriggerConfig& cfg, double slack);

/// sup |x| bound after T0 for the demo plant under u = -gain xhat with
/// gain > 3: |x0| e^{-(gain-3) T0} + (gain zmax + M) / (gain - 3).
double isps_witness_bound(double x0, double gain, double zmax, double M, double T0);

}  // namespace etcsim
