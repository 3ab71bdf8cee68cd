#include "etcsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace etcsim {

RateReport compute_rate(std::span<const SendEvent> sends) {
  std::vector<const SendEvent*> ordered;
  ordered.reserve(sends.size());
  for (const auto& s : sends) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(), [](const SendEvent* a, const SendEvent* b) {
    return a->tick != b->tick ? a->tick < b->tick : a->seq < b->seq;
  });

  RateReport r;
  r.trigger_count = ordered.size();
  if (ordered.size() < 2) return r;

  double min_interval = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < ordered.size(); ++k) {
    const double interval = ordered[k + 1]->t - ordered[k]->t;
    r.total_bits += ordered[k]->bits;
    r.total_time += interval;
    min_interval = std::min(min_interval, interval);
  }
  const auto intervals = static_cast<double>(ordered.size() - 1);
  r.mean_interval = r.total_time / intervals;
  r.min_interval = min_interval;
  if (r.total_time > 0.0) r.R_s = r.total_bits / r.total_time;
  return r;
}

RateReport compute_rate(const SimTrace& trace) {
  RateReport r = compute_rate(std::span<const SendEvent>(trace.sends));
  const auto envelopes = verify_envelopes(trace, trace.bounds);
  r.violation_count = envelopes.total_violations();
  r.max_abs_z = trace.max_abs_z;
  return r;
}

double entropy_rate_linear(double lambda1) { return lambda1 / std::numbers::ln2; }

double EntropyReference::demo_pointwise(double x) { return 2.0 + std::cos(x); }

double EntropyReference::demo_lower_bound() { return 1.0; }

std::size_t EnvelopeReport::total_violations() const {
  std::size_t n = 0;
  for (const auto& c : checks) n += c.violations;
  return n;
}

const EnvelopeCheck* EnvelopeReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

class CheckBuilder {
 public:
  CheckBuilder(std::string name, double bound, double slack) {
    check_.name = std::move(name);
    check_.bound = bound;
    check_.slack = slack;
    check_.max_excess = -std::numeric_limits<double>::infinity();
  }

  void add(double observed) {
    const double excess = observed - (check_.bound + check_.slack);
    ++check_.samples;
    check_.max_observed = std::max(check_.max_observed, observed);
    check_.max_excess = std::max(check_.max_excess, excess);
    if (excess > 0.0 || !std::isfinite(observed)) ++check_.violations;
  }

  EnvelopeCheck finish() {
    if (check_.samples == 0) check_.max_excess = 0.0;
    return check_;
  }

 private:
  EnvelopeCheck check_;
};

}  // namespace

EnvelopeReport verify_envelopes(const SimTrace& trace, const SchemeBounds& bounds) {
  EnvelopeReport report;

  CheckBuilder global("global", bounds.envelope, bounds.envelope_slack);
  if (trace.steps.empty()) {
    global.add(trace.max_abs_z);
  } else {
    for (const auto& s : trace.steps) global.add(std::abs(s.z));
  }
  for (const auto& r : trace.receptions) global.add(std::abs(r.z_before));
  report.checks.push_back(global.finish());

  CheckBuilder reception("reception", bounds.jump_bound, bounds.jump_slack);
  for (const auto& r : trace.receptions) reception.add(std::abs(r.z_after));
  report.checks.push_back(reception.finish());

  if (bounds.scheme == SchemeKind::nonlinear) {
    CheckBuilder sampling("sampling", bounds.sample_bound, bounds.sample_slack);
    for (const auto& c : trace.candidates) sampling.add(std::abs(c.z));
    report.checks.push_back(sampling.finish());

    // Intervals are compared in ticks so the check is exact on the grid.
    CheckBuilder zeno("zeno", 0.0, 0.0);
    const auto min_ticks = static_cast<double>(bounds.period_ticks);
    const double min_time = bounds.period;
    for (std::size_t k = 0; k + 1 < trace.sends.size(); ++k) {
      const auto ticks = static_cast<double>(trace.sends[k + 1].tick - trace.sends[k].tick);
      const bool short_interval = ticks < min_ticks || ticks * bounds.delta < min_time * (1.0 - 1e-12);
      // Encode a short interval as a positive excess over the zero bound.
      zeno.add(short_interval ? 1.0 : 0.0);
    }
    report.checks.push_back(zeno.finish());
  }
  return report;
}

}  // namespace etcsim
