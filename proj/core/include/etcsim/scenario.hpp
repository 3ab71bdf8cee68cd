#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "etcsim/channel.hpp"
#include "etcsim/linear_etc.hpp"
#include "etcsim/nonlinear_etc.hpp"
#include "etcsim/plants.hpp"

namespace etcsim {

enum class SchemeKind { linear, nonlinear };

std::string_view to_string(SchemeKind kind);

/// What the simulated "true" plant is when the linear scheme runs.
enum class TruthModel {
  modal_linear,        // the diagonalized linear pair
  pendulum_nonlinear,  // phi'' = a sin(phi) + b u + w, observed through P^-1
};

std::string_view to_string(TruthModel model);
TruthModel parse_truth_model(std::string_view text);
std::string_view to_string(Integrator integrator);
Integrator parse_integrator(std::string_view text);

/// Threshold given either explicitly or as feasibility bound + margin.
struct ThresholdSpec {
  std::optional<double> value;
  double margin = 0.0;

  [[nodiscard]] double resolve(double min_feasible) const { return value.value_or(min_feasible + margin); }
};

struct LinearSetup {
  LinearizedPendulum pendulum = LinearizedPendulum::prototype();
  std::optional<PendulumParams> physical;  // when set, overrides `pendulum` via linearize()
  double M = 0.047;
  Gain2 K = Gain2(225.0, 11.0);
  double rho0 = 0.01;
  double b = 1.00001;
  ThresholdSpec J{std::nullopt, 0.1};
  TruthModel truth = TruthModel::modal_linear;
  Integrator integrator = Integrator::euler;
  double physical_noise_bound = 0.02;  // bound on the angular-acceleration noise (pendulum truth)
  Vec2 initial_physical = Vec2(0.1, 0.0);  // (phi, phi') at t = 0
  std::optional<Vec2> initial_estimate;    // modal xhat(0); defaults to x(0)
  std::optional<int> bits;                 // packet-size override
  std::optional<int> declared_bits;        // reference value reported by the experiments
};

struct NonlinearSetup {
  ScalarNonlinearPlant plant = ScalarNonlinearPlant::demo(0.1);
  double alpha = 0.01;
  ThresholdSpec J{std::nullopt, 0.01};
  double gain = 4.0;  // u = -gain * xhat
  double x0 = 0.5;
  double xhat0 = 0.5;
  std::optional<int> bits;
  std::optional<int> declared_bits;
};

struct Scenario {
  std::string name;
  double horizon = 10.0;  // s
  std::uint64_t seed = 1;
  ChannelConfig channel;  // channel.delta is the simulation sampling time
  DisturbanceKind disturbance = DisturbanceKind::uniform;
  std::variant<LinearSetup, NonlinearSetup> setup;

  [[nodiscard]] SchemeKind scheme() const noexcept {
    return std::holds_alternative<LinearSetup>(setup) ? SchemeKind::linear : SchemeKind::nonlinear;
  }
  [[nodiscard]] double delta() const noexcept { return channel.delta; }
};

/// Every bound a run is checked against, evaluated from the configuration.
struct SchemeBounds {
  SchemeKind scheme = SchemeKind::linear;
  double delta = 0.0;
  double gamma = 0.0;
  double J = 0.0;
  int bits = 0;
  double envelope = 0.0;        // bound on |z| at all times
  double envelope_slack = 0.0;  // one-step discretization slack on `envelope`
  double jump_bound = 0.0;      // bound on |z(t_c+)|
  double jump_slack = 0.0;
  double sample_bound = 0.0;    // nonlinear: Upsilon(0), bound on |z(t_s^k)|
  double sample_slack = 0.0;
  double period = 0.0;          // nonlinear: alpha + gamma
  Tick period_ticks = 0;
  double entropy_reference = 0.0;  // bits/s reference for the rate
};

struct LinearResolved {
  LinearDiagonalSystem system;
  LinearTriggerConfig trigger;
  int bits = 1;
};

struct NonlinearResolved {
  NonlinearTriggerConfig trigger;
  NonlinearPacketSize size;
  int bits = 1;
};

/// A scenario with every derived quantity evaluated and every feasibility
/// condition checked.
struct ResolvedScenario {
  Scenario scenario;  // channel.gamma snapped to the grid
  std::variant<LinearResolved, NonlinearResolved> scheme;
  SchemeBounds bounds;
  Tick steps = 0;
  std::vector<std::string> warnings;
};

/// Throws ConfigError naming the violated condition.
ResolvedScenario resolve(const Scenario& scenario);

/// One-step slack for the nonlinear bounds: (e^{L_x delta} - 1)(Upsilon(gamma) + L_w M / L_x).
double nonlinear_discrete_slack(const NonlinearTriggerConfig& cfg, double delta);

}  // namespace etcsim
