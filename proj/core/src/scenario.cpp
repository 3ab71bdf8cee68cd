#include "etcsim/scenario.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "etcsim/errors.hpp"

namespace etcsim {

std::string_view to_string(SchemeKind kind) { return kind == SchemeKind::linear ? "linear" : "nonlinear"; }

std::string_view to_string(TruthModel model) {
  return model == TruthModel::modal_linear ? "modal-linear" : "pendulum-nonlinear";
}

TruthModel parse_truth_model(std::string_view text) {
  if (text == "modal-linear") return TruthModel::modal_linear;
  if (text == "pendulum-nonlinear") return TruthModel::pendulum_nonlinear;
  throw ConfigError("unknown truth model '" + std::string(text) + "' (expected modal-linear or pendulum-nonlinear)");
}

std::string_view to_string(Integrator integrator) { return integrator == Integrator::euler ? "euler" : "exact"; }

Integrator parse_integrator(std::string_view text) {
  if (text == "euler") return Integrator::euler;
  if (text == "exact") return Integrator::exact;
  throw ConfigError("unknown integrator '" + std::string(text) + "' (expected euler or exact)");
}

double nonlinear_discrete_slack(const NonlinearTriggerConfig& cfg, double delta) {
  return std::expm1(cfg.L_x * delta) * (upsilon(cfg, cfg.gamma, cfg.M) + cfg.L_w * cfg.M / cfg.L_x);
}

namespace {

// Smallest value of df/dx over the state space.
double entropy_lower_bound(const ScalarNonlinearPlant& plant) {
  switch (plant.map()) {
    case ScalarNonlinearPlant::Map::demo:
      return 2.0 - 1.0;  // 2 + cos(x) >= 1
    case ScalarNonlinearPlant::Map::unstable_linear:
      return plant.rate();
  }
  return 0.0;
}

Tick horizon_steps(double horizon, double delta) {
  if (!(horizon > 0.0)) throw ConfigError("horizon_s must be > 0");
  const double steps = horizon / delta;
  const double r = std::round(steps);
  if (std::abs(steps - r) > 1e-9 * std::max(1.0, steps)) {
    throw ConfigError("horizon_s must be a multiple of delta_s");
  }
  return static_cast<Tick>(r);
}

void resolve_linear(ResolvedScenario& out, const LinearSetup& setup) {
  const double delta = out.scenario.channel.delta;
  const double gamma = out.scenario.channel.gamma;
  LinearDiagonalSystem sys = setup.physical ? linearize_and_diagonalize(*setup.physical) : diagonalize(setup.pendulum);
  sys.M = setup.M;
  sys.K = setup.K;

  LinearTriggerConfig trig{0.0, setup.rho0, setup.b, gamma, sys.lambda1, setup.M};
  trig.J = setup.J.resolve(trig.min_feasible_J());
  trig.validate();
  const int bits = setup.bits.value_or(linear_packet_size(trig));
  // Constructing the scheme checks that timing decoding is unambiguous.
  LinearEtc probe(trig, out.scenario.channel, bits);

  const Vec2 x0 = sys.to_modal(setup.initial_physical);
  const Vec2 xhat0 = setup.initial_estimate.value_or(x0);
  if (std::abs(x0(0) - xhat0(0)) > trig.J) {
    throw ConfigError("initial condition violates |z1(0)| <= J");
  }

  SchemeBounds& b = out.bounds;
  b.scheme = SchemeKind::linear;
  b.J = trig.J;
  b.bits = bits;
  b.envelope = linear_error_envelope(trig);
  b.envelope_slack = linear_discrete_slack(trig, delta);
  b.jump_bound = trig.rho0 * trig.J;
  b.jump_slack = b.envelope_slack;
  b.entropy_reference = sys.lambda1 / std::numbers::ln2;
  out.scheme = LinearResolved{sys, trig, bits};
}

void resolve_nonlinear(ResolvedScenario& out, const NonlinearSetup& setup) {
  const double delta = out.scenario.channel.delta;
  const auto& plant = setup.plant;
  NonlinearTriggerConfig trig{0.0, setup.alpha, out.scenario.channel.gamma, plant.L_x(), plant.L_w(), plant.M()};
  trig.J = setup.J.resolve(trig.min_feasible_J());
  trig.validate();
  const auto size = nonlinear_packet_size(trig);
  const int bits = setup.bits.value_or(size.bits);
  NonlinearEtc probe(trig, plant, out.scenario.channel, bits);

  if (!(std::abs(setup.x0 - setup.xhat0) < trig.J)) {
    throw ConfigError("initial condition violates |z(0)| < J");
  }

  const double slack = nonlinear_discrete_slack(trig, delta);
  SchemeBounds& b = out.bounds;
  b.scheme = SchemeKind::nonlinear;
  b.J = trig.J;
  b.bits = bits;
  b.envelope = upsilon(trig, trig.gamma, trig.M);
  b.envelope_slack = slack;
  b.jump_bound = trig.J;
  b.jump_slack = slack;
  b.sample_bound = upsilon(trig, 0.0, trig.M);
  b.sample_slack = slack;
  b.period = trig.period();
  b.period_ticks = probe.period_ticks();
  b.entropy_reference = entropy_lower_bound(plant);
  out.scheme = NonlinearResolved{trig, size, bits};
}

}  // namespace

ResolvedScenario resolve(const Scenario& scenario) {
  ResolvedScenario out;
  out.scenario = scenario;
  const auto& ch = scenario.channel;
  out.scenario.channel = make_channel_config(ch.gamma, ch.delta, ch.min_delay_steps, ch.seed, ch.law, &out.warnings);
  out.steps = horizon_steps(scenario.horizon, ch.delta);
  out.bounds.delta = ch.delta;
  out.bounds.gamma = out.scenario.channel.gamma;
  std::visit(
      [&](const auto& setup) {
        using T = std::decay_t<decltype(setup)>;
        if constexpr (std::is_same_v<T, LinearSetup>) {
          resolve_linear(out, setup);
        } else {
          resolve_nonlinear(out, setup);
        }
      },
      scenario.setup);
  return out;
}

}  // namespace etcsim
