#include "etcsim/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "etcsim/channel.hpp"
#include "etcsim/engine.hpp"
#include "etcsim/errors.hpp"
#include "etcsim/io.hpp"
#include "etcsim/linear_etc.hpp"
#include "etcsim/metrics.hpp"
#include "etcsim/plants.hpp"

namespace etcsim {

std::size_t check_protocol(const SimTrace& trace, std::string* detail) {
  std::size_t violations = 0;
  auto fail = [&](const std::string& what) {
    if (violations++ == 0 && detail) *detail = what;
  };

  std::map<std::uint64_t, const SendEvent*> by_seq;
  for (const auto& s : trace.sends) {
    if (!by_seq.emplace(s.seq, &s).second) fail("duplicate send sequence number " + std::to_string(s.seq));
  }
  std::map<std::uint64_t, Tick> received_at;
  const double gamma = trace.bounds.gamma;
  for (const auto& r : trace.receptions) {
    const auto it = by_seq.find(r.seq);
    if (it == by_seq.end() || it->second->tick != r.send_tick) {
      fail("reception " + std::to_string(r.seq) + " has no matching send");
      continue;
    }
    const double delay = r.t - r.t_send;
    if (r.tick <= r.send_tick || !(delay > 0.0) || delay > gamma * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "packet " << r.seq << " delay " << delay << " s outside (0, " << gamma << "]";
      fail(os.str());
    }
    received_at[r.seq] = r.tick;
  }

  std::vector<const SendEvent*> ordered;
  for (const auto& s : trace.sends) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->tick < b->tick; });
  for (std::size_t k = 0; k + 1 < ordered.size(); ++k) {
    const auto it = received_at.find(ordered[k]->seq);
    if (it == received_at.end() || it->second > ordered[k + 1]->tick) {
      fail("packet " + std::to_string(ordered[k + 1]->seq) + " sent while " + std::to_string(ordered[k]->seq) +
           " was in flight");
    }
  }
  return violations;
}

Lemma1Report lemma1_harness(const SimTrace& trace, const NonlinearTriggerConfig& cfg, double slack) {
  Lemma1Report report;
  const auto& steps = trace.steps;
  if (steps.empty()) return report;
  const double delta = trace.bounds.delta;
  const Tick period = trace.bounds.period_ticks;
  const double M = cfg.M;

  for (const auto& r : trace.receptions) {
    const Tick ts = r.send_tick;
    const Tick prev = ts - period;
    Tick tbar = -1;
    for (Tick n = std::max<Tick>(prev + 1, 0); n <= ts && n < static_cast<Tick>(steps.size()); ++n) {
      if (std::abs(steps[static_cast<std::size_t>(n)].z) >= cfg.J) {
        tbar = n;
        break;
      }
    }
    if (tbar < 0) continue;
    ++report.windows;
    for (Tick n = tbar; n < r.tick && n < static_cast<Tick>(steps.size()); ++n) {
      const double theta = static_cast<double>(n - ts) * delta;
      const double bound = upsilon(cfg, theta, M) + slack;
      const double excess = std::abs(steps[static_cast<std::size_t>(n)].z) - bound;
      ++report.samples;
      if (report.samples == 1 || excess > report.max_excess) report.max_excess = excess;
      if (excess > 0.0) ++report.violations;
    }
  }
  return report;
}

double isps_witness_bound(double x0, double gain, double zmax, double M, double T0) {
  const double decay = gain - 3.0;
  if (!(decay > 0.0)) throw ConfigError("ISpS witness needs gain > 3");
  return std::abs(x0) * std::exp(-decay * T0) + (gain * zmax + M) / decay;
}

namespace {

std::string format_count(std::size_t bad, std::size_t total, std::string_view what) {
  std::ostringstream os;
  os << bad << " of " << total << ' ' << what;
  return os.str();
}

struct RunSummary {
  bool completed = true;
  std::string diagnostics;
  std::map<std::string, std::size_t> violations;
  std::map<std::string, std::size_t> samples;
  std::size_t protocol = 0;
  std::string protocol_detail;
  Lemma1Report lemma;
  double isps_observed = 0.0;  // sup |x| after T0
};

RunSummary summarize(const ResolvedScenario& rs, const SimTrace& trace) {
  RunSummary s;
  s.completed = trace.ok();
  s.diagnostics = trace.diagnostics;
  for (const auto& c : verify_envelopes(trace, rs.bounds).checks) {
    s.violations[c.name] = c.violations;
    s.samples[c.name] = c.samples;
  }
  s.protocol = check_protocol(trace, &s.protocol_detail);
  if (const auto* nl = std::get_if<NonlinearResolved>(&rs.scheme)) {
    s.lemma = lemma1_harness(trace, nl->trigger, rs.bounds.envelope_slack);
    const double T0 = 5.0 / nl->trigger.L_x;
    for (const auto& step : trace.steps) {
      if (step.t >= T0) s.isps_observed = std::max(s.isps_observed, std::abs(step.x1));
    }
  }
  return s;
}

std::vector<RunSummary> run_many(const ResolvedScenario& base, std::size_t runs, std::uint64_t first_seed,
                                 unsigned threads) {
  std::vector<RunSummary> out(runs);
  parallel_for(runs, threads, [&](std::size_t i) {
    ResolvedScenario rs = base;
    rs.scenario.seed = first_seed + i;
    out[i] = summarize(rs, run(rs));
  });
  return out;
}

class Suite {
 public:
  void add(std::string name, bool passed, std::string detail) {
    checks_.push_back(ValidationCheck{std::move(name), passed, std::move(detail)});
  }

  template <typename Fn>
  void guarded(const std::string& name, Fn&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      add(name, false, std::string("exception: ") + e.what());
    }
  }

  std::vector<ValidationCheck> take() { return std::move(checks_); }

 private:
  std::vector<ValidationCheck> checks_;
};

void plant_checks(Suite& suite) {
  suite.guarded("plants/diagonalization-round-trip", [&] {
    const auto proto = diagonalize(LinearizedPendulum::prototype());
    const auto physical = linearize_and_diagonalize(PendulumParams::prototype());
    const double err = std::max(proto.round_trip_error(), physical.round_trip_error());
    std::ostringstream os;
    os << "relative error " << err;
    suite.add("plants/diagonalization-round-trip", err <= 1e-9, os.str());
  });

  suite.guarded("plants/lipschitz-demo", [&] {
    const auto plant = ScalarNonlinearPlant::demo(0.1);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> state(-10.0, 10.0);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    std::size_t bad = 0;
    constexpr std::size_t n = 10000;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = state(rng), xh = state(rng), u = state(rng), w = dist(rng);
      const double lhs = std::abs(plant.rhs(x, u, w) - plant.rhs(xh, u, 0.0));
      if (lhs > 3.0 * std::abs(x - xh) + std::abs(w) + 1e-12) ++bad;
    }
    suite.add("plants/lipschitz-demo", bad == 0, format_count(bad, n, "triples violate L_x=3, L_w=1"));
  });

  suite.guarded("plants/euler-vs-exact", [&] {
    const double lambda = diagonalize(LinearizedPendulum::prototype()).lambda1;
    std::size_t bad = 0, total = 0;
    for (double delta : {0.001, 0.003, 0.005, 0.01}) {
      for (double x : {-2.0, -0.1, 0.01, 0.5, 3.0}) {
        const double e = step_scalar_linear(lambda, 0.0, x, 0.0, 0.0, delta, Integrator::euler);
        const double ex = step_scalar_linear(lambda, 0.0, x, 0.0, 0.0, delta, Integrator::exact);
        ++total;
        if (std::abs(e - ex) > lambda * lambda * delta * delta * std::abs(x)) ++bad;
      }
    }
    suite.add("plants/euler-vs-exact", bad == 0, format_count(bad, total, "steps outside lambda^2 delta^2 |x|"));
  });

  suite.guarded("plants/disturbance-bound", [&] {
    std::size_t total = 0;
    for (auto kind : {DisturbanceKind::uniform, DisturbanceKind::worst_case}) {
      DisturbanceSource src(0.047, 11, kind);
      for (int i = 0; i < 100000; ++i, ++total) (void)src.sample();  // throws past the bound
    }
    suite.add("plants/disturbance-bound", true, std::to_string(total) + " samples within M");
  });
}

void channel_checks(Suite& suite) {
  suite.guarded("channel/delay-and-payload", [&] {
    ChannelConfig cfg{0.015, 0.003, 2, 99, DelayLaw::uniform};
    Channel ch(cfg);
    std::mt19937_64 rng(5);
    std::size_t bad = 0;
    constexpr int n = 10000;
    Tick now = 0;
    for (int i = 0; i < n; ++i) {
      const auto payload = BitString::from_uint(rng() & 0x7f, 7);
      ch.send(Packet{static_cast<std::uint64_t>(i), payload, now, static_cast<double>(now) * cfg.delta});
      std::optional<Packet> got;
      while (!(got = ch.poll(++now))) {
      }
      const Tick d = now - got->send_tick;
      if (!(got->payload == payload) || d < cfg.min_delay_steps || d > cfg.max_delay_steps()) ++bad;
    }
    suite.add("channel/delay-and-payload", bad == 0, format_count(bad, n, "packets corrupted or mistimed"));
  });

  suite.guarded("channel/single-in-flight", [&] {
    Channel ch(ChannelConfig{0.006, 0.003, 2, 1, DelayLaw::uniform});
    ch.send(Packet{0, BitString::from_uint(1, 1), 0, 0.0});
    bool rejected = false;
    try {
      ch.send(Packet{1, BitString::from_uint(0, 1), 0, 0.0});
    } catch (const ProtocolError&) {
      rejected = true;
    }
    suite.add("channel/single-in-flight", rejected, rejected ? "second send rejected" : "second send accepted");
  });
}

void quantizer_checks(Suite& suite, const std::vector<ResolvedScenario>& resolved) {
  for (const auto& rs : resolved) {
    const std::string name = "quantizer/" + rs.scenario.name;
    suite.guarded(name, [&] {
      if (const auto* lin = std::get_if<LinearResolved>(&rs.scheme)) {
        const auto& ch = rs.scenario.channel;
        const TimingQuantizer q(ch.gamma, lin->bits, ch.min_delay());
        std::size_t bad = 0, total = 0;
        double worst = 0.0;
        for (Tick n = 0; n < (Tick{1} << 16); ++n) {
          const double ts = static_cast<double>(n) * ch.delta;
          const int sign = (n % 2 == 0) ? 1 : -1;
          const auto payload = q.encode(ts, sign);
          for (int d = ch.min_delay_steps; d <= ch.max_delay_steps(); ++d) {
            const auto dec = q.decode(payload, static_cast<double>(n + d) * ch.delta);
            const double err = std::abs(dec.q - ts);
            worst = std::max(worst, err);
            ++total;
            if (dec.sign != sign || err > q.resolution() * (1.0 + 1e-9) + 1e-12) ++bad;
          }
        }
        std::ostringstream os;
        os << format_count(bad, total, "decodes off") << ", worst " << worst << " s vs gamma/2^g "
           << q.resolution();
        suite.add(name, bad == 0, os.str());
      } else {
        const auto& nl = std::get<NonlinearResolved>(rs.scheme);
        const ZQuantizer q(rs.bounds.sample_bound, nl.bits);
        constexpr std::size_t n = (std::size_t{1} << 16) + 1;
        std::size_t bad = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double z = -q.range() + 2.0 * q.range() * static_cast<double>(i) / static_cast<double>(n - 1);
          const double err = std::abs(q.decode(q.encode(z)) - z);
          worst = std::max(worst, err);
          // z itself carries round-off of a few ulps of the range.
          if (err > q.max_error() + 8.0 * std::numeric_limits<double>::epsilon() * q.range()) ++bad;
        }
        std::ostringstream os;
        os << format_count(bad, n, "decodes off") << ", worst " << worst << " vs Upsilon(0)/2^g " << q.max_error();
        suite.add(name, bad == 0, os.str());
      }
    });
  }
}

void run_checks(Suite& suite, const std::vector<ResolvedScenario>& resolved, const ValidationOptions& options) {
  for (const auto& base : resolved) {
    const std::string prefix = "runs/" + base.scenario.name + "/";
    suite.guarded(prefix + "seeded", [&] {
      const auto results = run_many(base, options.runs, 1, options.threads);
      std::size_t failed = 0, protocol = 0;
      std::string first_failure, first_protocol;
      std::map<std::string, std::size_t> violations, samples;
      Lemma1Report lemma;
      double isps = 0.0;
      for (const auto& r : results) {
        if (!r.completed) {
          if (failed++ == 0) first_failure = r.diagnostics;
        }
        if (r.protocol > 0 && protocol == 0) first_protocol = r.protocol_detail;
        protocol += r.protocol;
        for (const auto& [k, v] : r.violations) violations[k] += v;
        for (const auto& [k, v] : r.samples) samples[k] += v;
        lemma.windows += r.lemma.windows;
        lemma.samples += r.lemma.samples;
        lemma.violations += r.lemma.violations;
        lemma.max_excess = std::max(lemma.max_excess, r.lemma.max_excess);
        isps = std::max(isps, r.isps_observed);
      }
      const auto runs = std::to_string(results.size()) + " runs";
      suite.add(prefix + "completed", failed == 0,
                format_count(failed, results.size(), "runs aborted") + (failed ? ": " + first_failure : ""));
      suite.add(prefix + "protocol", protocol == 0,
                std::to_string(protocol) + " protocol violations over " + runs +
                    (protocol ? ": " + first_protocol : ""));
      for (const auto& [k, v] : violations) {
        suite.add(prefix + "envelope-" + k, v == 0, format_count(v, samples[k], "samples over bound + slack"));
      }

      if (const auto* nl = std::get_if<NonlinearResolved>(&base.scheme)) {
        std::ostringstream os;
        os << format_count(lemma.violations, lemma.samples, "samples over Upsilon_w") << " in " << lemma.windows
           << " windows";
        suite.add(prefix + "lemma1", lemma.violations == 0, os.str());

        const auto& setup = std::get<NonlinearSetup>(base.scenario.setup);
        if (setup.gain > 3.0 && setup.plant.map() == ScalarNonlinearPlant::Map::demo) {
          const double bound = isps_witness_bound(std::max(std::abs(setup.x0), std::abs(setup.xhat0)), setup.gain,
                                                  base.bounds.envelope + base.bounds.envelope_slack,
                                                  nl->trigger.M, 5.0 / nl->trigger.L_x);
          std::ostringstream is;
          is << "sup|x| after T0 = " << isps << " vs bound " << bound;
          suite.add(prefix + "isps-witness", isps <= bound, is.str());
        }
      }

      if (std::holds_alternative<LinearResolved>(base.scheme)) {
        std::size_t bad_seeds = 0;
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
          ResolvedScenario rs = base;
          rs.scenario.seed = seed;
          const auto trace = run(rs);
          double peak = 0.0;
          for (const auto& s : trace.steps) {
            if (s.t >= 2.0) peak = std::max(peak, std::abs(s.phi));
          }
          worst = std::max(worst, peak);
          if (!trace.ok() || peak >= 0.2) ++bad_seeds;
        }
        std::ostringstream os;
        os << format_count(bad_seeds, 10, "seeds with |phi| >= 0.2 after 2 s") << ", worst " << worst << " rad";
        suite.add(prefix + "stabilization", bad_seeds == 0, os.str());
      }
    });

    suite.guarded(prefix + "adversarial", [&] {
      std::size_t bad = 0;
      std::string detail = "worst-case disturbance and delay";
      for (auto kind : {DisturbanceKind::uniform, DisturbanceKind::worst_case}) {
        Scenario s = base.scenario;
        s.disturbance = kind;
        s.channel.law = DelayLaw::worst_case;
        const auto rs = resolve(s);
        const auto r = summarize(rs, run(rs));
        std::size_t v = r.protocol;
        for (const auto& [k, n] : r.violations) v += n;
        if (!r.completed || v > 0) {
          ++bad;
          detail = std::string(to_string(kind)) + " disturbance with maximal delay: " + std::to_string(v) +
                   " violations " + r.diagnostics;
        }
      }
      suite.add(prefix + "adversarial", bad == 0, detail);
    });

    suite.guarded(prefix + "determinism", [&] {
      auto text = [&] {
        std::ostringstream os;
        const auto trace = run(base);
        write_trace_csv(os, trace);
        write_events_csv(os, trace);
        return os.str();
      };
      const bool same = text() == text();
      suite.add(prefix + "determinism", same, same ? "byte-identical" : "outputs differ");
    });
  }
}

void metric_checks(Suite& suite, const std::vector<ResolvedScenario>& resolved) {
  suite.guarded("metrics/permutation-stable", [&] {
    const auto trace = run(resolved.front());
    auto sends = trace.sends;
    const auto a = compute_rate(std::span<const SendEvent>(sends));
    std::mt19937_64 rng(3);
    std::shuffle(sends.begin(), sends.end(), rng);
    const auto b = compute_rate(std::span<const SendEvent>(sends));
    const bool same = a.R_s == b.R_s && a.total_bits == b.total_bits && a.total_time == b.total_time;
    suite.add("metrics/permutation-stable", same, same ? "identical after shuffle" : "rate changed after shuffle");
  });

  suite.guarded("metrics/rate-bound-monotone", [&] {
    const auto& tpl = find_builtin("paper/nonlinear-rate").runs.front();
    double prev = -1.0;
    std::size_t bad = 0, feasible = 0;
    for (double gamma : linspace(0.02, 0.99, 20)) {
      Scenario s = tpl;
      s.channel.gamma = gamma;
      const auto rs = resolve(s);
      const auto& nl = std::get<NonlinearResolved>(rs.scheme);
      const double theorem = rate_lower_bound(nl.trigger, nl.bits).theorem;
      if (theorem < prev) ++bad;
      prev = theorem;
      ++feasible;
    }
    suite.add("metrics/rate-bound-monotone", bad == 0,
              format_count(bad, feasible, "grid points where the theorem rate bound decreased"));
  });
}

void config_checks(Suite& suite) {
  suite.guarded("cli/builtin-round-trip", [&] {
    std::size_t bad = 0, total = 0;
    for (const auto& b : builtin_scenarios()) {
      for (const auto& s : b.runs) {
        ++total;
        if (scenario_text(scenario_from_json(scenario_to_json(s))) != scenario_text(s)) ++bad;
      }
    }
    suite.add("cli/builtin-round-trip", bad == 0, format_count(bad, total, "scenarios changed by a round trip"));
  });
}

}  // namespace

std::vector<ValidationCheck> run_validation(const ValidationOptions& options) {
  Suite suite;
  std::vector<ResolvedScenario> resolved;
  for (const auto& b : builtin_scenarios()) {
    for (const auto& s : b.runs) {
      try {
        resolved.push_back(resolve(s));
        suite.add("config/" + s.name, true, "feasible");
      } catch (const ConfigError& e) {
        suite.add("config/" + s.name, false, e.what());
      }
    }
  }
  plant_checks(suite);
  channel_checks(suite);
  config_checks(suite);
  if (!resolved.empty()) {
    quantizer_checks(suite, resolved);
    metric_checks(suite, resolved);
    run_checks(suite, resolved, options);
  }
  return suite.take();
}

}  // namespace etcsim
