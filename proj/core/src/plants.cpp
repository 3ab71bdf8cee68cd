#include "etcsim/plants.hpp"

#include <cmath>
#include <string>

#include "etcsim/errors.hpp"

namespace etcsim {

void PendulumParams::validate() const {
  const auto require_positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("pendulum parameter ") + name + " must be > 0");
    }
  };
  require_positive(m1, "m1");
  require_positive(m2, "m2");
  require_positive(l, "l");
  require_positive(inertia, "I");
  require_positive(g_acc, "g");
  require_positive(k_xi, "k_xi");
}

PendulumParams PendulumParams::prototype() {
  return PendulumParams{.m1 = 0.030, .m2 = 0.010, .l = 0.180, .inertia = 3.57e-4, .g_acc = 9.81, .k_xi = 0.001};
}

Mat2 LinearizedPendulum::a_matrix() const {
  Mat2 a;
  a << 0.0, 1.0, stiffness, 0.0;
  return a;
}

Vec2 LinearizedPendulum::b_vector() const { return Vec2(0.0, input_gain); }

LinearizedPendulum LinearizedPendulum::prototype() { return LinearizedPendulum{53.58, 0.50}; }

LinearizedPendulum linearize(const PendulumParams& p) {
  p.validate();
  return LinearizedPendulum{
      .stiffness = p.total_mass() * p.g_acc * p.l / p.inertia,
      .input_gain = p.k_xi * p.l / p.inertia,
  };
}

Mat2 LinearDiagonalSystem::a_diagonal() const {
  Mat2 a = Mat2::Zero();
  a(0, 0) = lambda1;
  a(1, 1) = lambda2;
  return a;
}

double LinearDiagonalSystem::round_trip_error() const {
  const Mat2 rebuilt = P * a_diagonal() * P_inv;
  const double scale = a_physical.cwiseAbs().rowwise().sum().maxCoeff();
  return (rebuilt - a_physical).cwiseAbs().rowwise().sum().maxCoeff() / scale;
}

LinearDiagonalSystem diagonalize(const LinearizedPendulum& lp) {
  if (!(lp.stiffness > 0.0) || !std::isfinite(lp.stiffness)) {
    throw ConfigError("companion matrix [[0,1],[a,0]] needs a > 0 to have distinct real eigenvalues");
  }
  LinearDiagonalSystem sys;
  sys.a_physical = lp.a_matrix();
  sys.b_physical = lp.b_vector();
  const double lambda = std::sqrt(lp.stiffness);
  sys.lambda1 = lambda;
  sys.lambda2 = -lambda;

  // Eigenvector of [[0,1],[a,0]] for eigenvalue mu is (1, mu).
  const double norm = std::hypot(1.0, lambda);
  sys.P << 1.0 / norm, -1.0 / norm, lambda / norm, lambda / norm;
  if (std::abs(sys.P.determinant()) < 1e-12) {
    throw ConfigError("eigenvector matrix P is singular; companion matrix not diagonalizable");
  }
  sys.P_inv = sys.P.inverse();
  sys.b = sys.P_inv * sys.b_physical;
  return sys;
}

LinearDiagonalSystem linearize_and_diagonalize(const PendulumParams& p) { return diagonalize(linearize(p)); }

double step_scalar_linear(double lambda, double b, double x, double u, double w, double delta,
                          Integrator integrator) {
  const double drive = b * u + w;
  if (integrator == Integrator::euler || lambda == 0.0) {
    return x + delta * (lambda * x + drive);
  }
  const double growth = std::exp(lambda * delta);
  return x * growth + drive * std::expm1(lambda * delta) / lambda;
}

Vec2 step_dynamics(const LinearDiagonalSystem& sys, const Vec2& x, double u, const Vec2& w, double delta,
                   Integrator integrator) {
  return Vec2(step_scalar_linear(sys.lambda1, sys.b(0), x(0), u, w(0), delta, integrator),
              step_scalar_linear(sys.lambda2, sys.b(1), x(1), u, w(1), delta, integrator));
}

Vec2 step_pendulum_nonlinear(const LinearizedPendulum& lp, const Vec2& state, double u, double w2,
                             double delta) {
  const double phi = state(0);
  const double rate = state(1);
  return Vec2(phi + delta * rate, rate + delta * (lp.stiffness * std::sin(phi) + lp.input_gain * u + w2));
}

ScalarNonlinearPlant::ScalarNonlinearPlant(Map map, double L_x, double L_w, double M, double rate)
    : map_(map), L_x_(L_x), L_w_(L_w), M_(M), rate_(rate) {
  if (!(L_x > 0.0)) throw ConfigError("plant Lipschitz constant L_x must be > 0");
  if (!(L_w > 0.0)) throw ConfigError("plant Lipschitz constant L_w must be > 0");
  if (!(M >= 0.0)) throw ConfigError("disturbance bound M must be >= 0");
}

ScalarNonlinearPlant ScalarNonlinearPlant::demo(double M) { return {Map::demo, 3.0, 1.0, M}; }

ScalarNonlinearPlant ScalarNonlinearPlant::unstable_linear(double a, double M) {
  return {Map::unstable_linear, a, 1.0, M, a};
}

double ScalarNonlinearPlant::rhs(double x, double u, double w) const {
  switch (map_) {
    case Map::demo:
      return 2.0 * x + std::sin(x) + u + w;
    case Map::unstable_linear:
      return rate_ * x + u + w;
  }
  return 0.0;
}

double ScalarNonlinearPlant::jacobian(double x) const {
  switch (map_) {
    case Map::demo:
      return 2.0 + std::cos(x);
    case Map::unstable_linear:
      return rate_;
  }
  return 0.0;
}

double ScalarNonlinearPlant::step(double x, double u, double w, double delta) const {
  return x + delta * rhs(x, u, w);
}

std::string_view ScalarNonlinearPlant::rhs_id() const noexcept {
  switch (map_) {
    case Map::demo:
      return "demo";
    case Map::unstable_linear:
      return "unstable-linear";
  }
  return "demo";
}

ScalarNonlinearPlant::Map ScalarNonlinearPlant::parse_map(std::string_view id) {
  if (id == "demo") return Map::demo;
  if (id == "unstable-linear") return Map::unstable_linear;
  throw ConfigError("unknown plant map '" + std::string(id) + "' (expected demo or unstable-linear)");
}

std::string_view to_string(DisturbanceKind kind) {
  switch (kind) {
    case DisturbanceKind::uniform:
      return "uniform";
    case DisturbanceKind::worst_case:
      return "worst-case";
    case DisturbanceKind::zero:
      return "zero";
  }
  return "uniform";
}

DisturbanceKind parse_disturbance_kind(std::string_view text) {
  if (text == "uniform") return DisturbanceKind::uniform;
  if (text == "worst-case") return DisturbanceKind::worst_case;
  if (text == "zero") return DisturbanceKind::zero;
  throw ConfigError("unknown disturbance kind '" + std::string(text) + "'");
}

DisturbanceSource::DisturbanceSource(double bound, std::uint64_t seed, DisturbanceKind kind)
    : bound_(bound), kind_(kind), rng_(seed) {
  if (!(bound >= 0.0) || !std::isfinite(bound)) throw ConfigError("disturbance bound M must be >= 0");
}

double DisturbanceSource::sample() {
  double w = 0.0;
  switch (kind_) {
    case DisturbanceKind::uniform:
      w = bound_ * unit_(rng_);
      break;
    case DisturbanceKind::worst_case:
      w = bound_;
      break;
    case DisturbanceKind::zero:
      break;
  }
  if (std::abs(w) > bound_) throw InvariantViolation("disturbance sample exceeded its bound");
  return w;
}

}  // namespace etcsim
