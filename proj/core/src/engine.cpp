#include "etcsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "etcsim/errors.hpp"
#include "etcsim/seeds.hpp"

namespace etcsim {

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed:
      return "completed";
    case RunStatus::diverged:
      return "diverged";
    case RunStatus::invariant_breach:
      return "invariant-breach";
  }
  return "completed";
}

namespace {

bool diverged(double v) { return !std::isfinite(v) || std::abs(v) > kDivergenceThreshold; }

ChannelConfig run_channel(const ResolvedScenario& rs) {
  ChannelConfig cfg = rs.scenario.channel;
  cfg.seed = derive_seed(rs.scenario.seed ^ rs.scenario.channel.seed, 1);
  return cfg;
}

SimTrace make_trace(const ResolvedScenario& rs, const RunOptions& options) {
  SimTrace trace;
  trace.scenario_name = rs.scenario.name;
  trace.scheme = rs.scenario.scheme();
  trace.seed = rs.scenario.seed;
  trace.bounds = rs.bounds;
  if (options.record_steps) trace.steps.reserve(static_cast<std::size_t>(rs.steps));
  return trace;
}

void mark_diverged(SimTrace& trace, double t, double value) {
  trace.status = RunStatus::diverged;
  std::ostringstream os;
  os << "state magnitude " << value << " exceeded " << kDivergenceThreshold << " at t=" << t;
  trace.diagnostics = os.str();
}

void run_linear(const ResolvedScenario& rs, const LinearResolved& lin, const LinearSetup& setup,
                const RunOptions& options, SimTrace& trace) {
  const double delta = rs.scenario.channel.delta;
  const auto& sys = lin.system;
  Channel channel(run_channel(rs));
  LinearEtc scheme(lin.trigger, rs.scenario.channel, lin.bits);

  const std::uint64_t seed = rs.scenario.seed;
  DisturbanceSource w1_src(sys.M, derive_seed(seed, 0), rs.scenario.disturbance);
  DisturbanceSource w2_src(sys.M, derive_seed(seed, 2), rs.scenario.disturbance);
  DisturbanceSource noise_src(setup.physical_noise_bound, derive_seed(seed, 3), rs.scenario.disturbance);

  const bool pendulum_truth = setup.truth == TruthModel::pendulum_nonlinear;
  Vec2 physical = setup.initial_physical;
  Vec2 x = sys.to_modal(physical);
  Vec2 xhat = setup.initial_estimate.value_or(x);
  std::uint64_t seq = 0;

  for (Tick n = 0; n < rs.steps; ++n) {
    const double t = static_cast<double>(n) * delta;

    if (auto pkt = channel.poll(n)) {
      ReceptionEvent ev{pkt->seq, pkt->send_tick, n, pkt->t_send, t, x(0) - xhat(0), 0.0};
      xhat(0) += scheme.decode_and_jump(*pkt, t);
      ev.z_after = x(0) - xhat(0);
      trace.receptions.push_back(ev);
    }

    const double u = -(sys.K * xhat)(0);

    const double z1 = x(0) - xhat(0);
    if (scheme.should_trigger(z1)) {
      Packet pkt = scheme.make_packet(seq++, n, t, z1);
      trace.sends.push_back(SendEvent{pkt.seq, n, t, scheme.bits(), pkt.payload, z1});
      channel.send(std::move(pkt));
    }

    Vec2 w = Vec2::Zero();
    double noise = 0.0;
    if (pendulum_truth) {
      noise = noise_src.sample();
    } else {
      w = Vec2(w1_src.sample(), w2_src.sample());
    }

    trace.max_abs_z = std::max(trace.max_abs_z, std::abs(z1));
    if (options.record_steps) {
      const Vec2 phys = pendulum_truth ? physical : sys.to_physical(x);
      trace.steps.push_back(StepRecord{t, x(0), x(1), xhat(0), xhat(1), z1, u, w(0), pendulum_truth ? noise : w(1),
                                       phys(0), phys(1)});
    }

    if (pendulum_truth) {
      physical = step_pendulum_nonlinear(setup.pendulum, physical, u, noise, delta);
      x = sys.to_modal(physical);
    } else {
      x = step_dynamics(sys, x, u, w, delta, setup.integrator);
    }
    xhat = step_dynamics(sys, xhat, u, Vec2::Zero(), delta, setup.integrator);

    const double size = x.cwiseAbs().maxCoeff();
    if (diverged(size) || diverged(xhat.cwiseAbs().maxCoeff())) {
      mark_diverged(trace, t + delta, size);
      return;
    }
  }
}

void run_nonlinear(const ResolvedScenario& rs, const NonlinearResolved& nl, const NonlinearSetup& setup,
                   const RunOptions& options, SimTrace& trace) {
  const double delta = rs.scenario.channel.delta;
  const auto& plant = setup.plant;
  Channel channel(run_channel(rs));
  NonlinearEtc scheme(nl.trigger, plant, rs.scenario.channel, nl.bits);
  DisturbanceSource w_src(plant.M(), derive_seed(rs.scenario.seed, 0), rs.scenario.disturbance);

  double x = setup.x0;
  double xhat = setup.xhat0;

  for (Tick n = 0; n < rs.steps; ++n) {
    const double t = static_cast<double>(n) * delta;

    if (auto pkt = channel.poll(n)) {
      ReceptionEvent ev{pkt->seq, pkt->send_tick, n, pkt->t_send, t, x - xhat, 0.0};
      xhat = scheme.reconstruct_and_jump(*pkt, n);
      ev.z_after = x - xhat;
      trace.receptions.push_back(ev);
    }

    const double u = -setup.gain * xhat;
    const double z = x - xhat;

    if (scheme.is_candidate(n)) {
      const std::uint64_t k = scheme.candidate_index(n);
      const bool fired = scheme.should_trigger(z);
      trace.candidates.push_back(CandidateEvent{k, n, t, z, fired});
      if (fired) {
        Packet pkt = scheme.make_packet(k, n, t, z, xhat, rs.bounds.sample_slack);
        trace.sends.push_back(SendEvent{k, n, t, scheme.bits(), pkt.payload, z});
        channel.send(std::move(pkt));
      }
    }
    scheme.record_input(u);

    const double w = w_src.sample();
    trace.max_abs_z = std::max(trace.max_abs_z, std::abs(z));
    if (options.record_steps) {
      trace.steps.push_back(StepRecord{t, x, 0.0, xhat, 0.0, z, u, w, 0.0, 0.0, 0.0});
    }

    x = plant.step(x, u, w, delta);
    xhat = plant.step(xhat, u, 0.0, delta);
    if (diverged(x) || diverged(xhat)) {
      mark_diverged(trace, t + delta, std::abs(x));
      return;
    }
  }
}

}  // namespace

SimTrace run(const ResolvedScenario& scenario, const RunOptions& options) {
  SimTrace trace = make_trace(scenario, options);
  try {
    std::visit(
        [&](const auto& resolved) {
          using T = std::decay_t<decltype(resolved)>;
          if constexpr (std::is_same_v<T, LinearResolved>) {
            run_linear(scenario, resolved, std::get<LinearSetup>(scenario.scenario.setup), options, trace);
          } else {
            run_nonlinear(scenario, resolved, std::get<NonlinearSetup>(scenario.scenario.setup), options, trace);
          }
        },
        scenario.scheme);
  } catch (const InvariantViolation& e) {
    trace.status = RunStatus::invariant_breach;
    trace.diagnostics = e.what();
  }
  return trace;
}

SimTrace run(const Scenario& scenario, const RunOptions& options) { return run(resolve(scenario), options); }

std::vector<double> linspace(double start, double stop, std::size_t count) {
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {start};
  out.reserve(count);
  const double step = (stop - start) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out.push_back(start + step * static_cast<double>(i));
  out.back() = stop;
  return out;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

std::vector<SweepPoint> sweep(const Scenario& base, std::span<const double> gammas,
                              std::span<const std::uint64_t> seeds, unsigned threads) {
  std::vector<SweepPoint> points(gammas.size());
  std::vector<std::optional<ResolvedScenario>> resolved(gammas.size());
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    SweepPoint& p = points[i];
    p.gamma_requested = gammas[i];
    Scenario s = base;
    s.channel.gamma = gammas[i];
    try {
      resolved[i] = resolve(s);
      p.feasible = true;
      p.gamma = resolved[i]->scenario.channel.gamma;
      p.bits = resolved[i]->bounds.bits;
      p.J = resolved[i]->bounds.J;
      p.entropy_reference = resolved[i]->bounds.entropy_reference;
      p.warnings = resolved[i]->warnings;
    } catch (const ConfigError& e) {
      p.skip_reason = e.what();
    }
  }

  const std::size_t per_point = seeds.size();
  std::vector<RateReport> reports(gammas.size() * per_point);
  std::vector<RunStatus> statuses(reports.size(), RunStatus::completed);
  parallel_for(reports.size(), threads, [&](std::size_t job) {
    const std::size_t i = job / per_point;
    if (!resolved[i]) return;
    ResolvedScenario rs = *resolved[i];
    rs.scenario.seed = seeds[job % per_point];
    const SimTrace trace = run(rs, RunOptions{.record_steps = false});
    reports[job] = compute_rate(trace);
    statuses[job] = trace.status;
  });

  for (std::size_t i = 0; i < gammas.size(); ++i) {
    SweepPoint& p = points[i];
    if (!p.feasible) continue;
    RateReport pooled;
    std::size_t intervals = 0;
    for (std::size_t j = 0; j < per_point; ++j) {
      const auto& r = reports[i * per_point + j];
      pooled.total_bits += r.total_bits;
      pooled.total_time += r.total_time;
      pooled.trigger_count += r.trigger_count;
      pooled.violation_count += r.violation_count;
      pooled.max_abs_z = std::max(pooled.max_abs_z, r.max_abs_z);
      if (r.trigger_count >= 2) intervals += r.trigger_count - 1;
      if (r.min_interval) pooled.min_interval = std::min(pooled.min_interval.value_or(*r.min_interval), *r.min_interval);
      if (statuses[i * per_point + j] != RunStatus::completed) ++p.failed_runs;
    }
    if (intervals > 0) pooled.mean_interval = pooled.total_time / static_cast<double>(intervals);
    if (pooled.total_time > 0.0) pooled.R_s = pooled.total_bits / pooled.total_time;
    p.runs = per_point;
    p.rate = pooled;
    p.max_abs_z = pooled.max_abs_z;
    p.violations = pooled.violation_count;
  }
  return points;
}

}  // namespace etcsim
