#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "etcsim/errors.hpp"
#include "etcsim/plants.hpp"

using namespace etcsim;

// High-precision reference values (40 significant digits, evaluated offline).
namespace oracle {
constexpr double lambda1 = 7.319836063738039755;  // sqrt(53.58)
constexpr double b_modal = 0.252322175065652699;
constexpr double p11 = 0.135357783563678110;
constexpr double p21 = 0.990796785637059115;
constexpr double exp_step = 1.022202392808602187;  // e^{lambda1 0.003}
constexpr double euler_step = 1.021959508191214119;
}  // namespace oracle

TEST_CASE("identified pendulum has the expected companion form") {
  const auto lp = LinearizedPendulum::prototype();
  const Mat2 A = lp.a_matrix();
  CHECK(A(0, 0) == 0.0);
  CHECK(A(0, 1) == 1.0);
  CHECK(A(1, 0) == doctest::Approx(53.58));
  CHECK(A(1, 1) == 0.0);
  CHECK(lp.b_vector()(1) == doctest::Approx(0.50));
}

TEST_CASE("diagonalization of the identified pendulum") {
  const auto sys = diagonalize(LinearizedPendulum::prototype());
  CHECK(sys.lambda1 == doctest::Approx(oracle::lambda1).epsilon(1e-12));
  CHECK(sys.lambda2 == doctest::Approx(-oracle::lambda1).epsilon(1e-12));
  CHECK(std::abs(sys.P(0, 0)) == doctest::Approx(oracle::p11).epsilon(1e-12));
  CHECK(std::abs(sys.P(1, 0)) == doctest::Approx(oracle::p21).epsilon(1e-12));
  CHECK(sys.b(0) == doctest::Approx(oracle::b_modal).epsilon(1e-12));
  CHECK(sys.b(1) == doctest::Approx(oracle::b_modal).epsilon(1e-12));
  CHECK(sys.round_trip_error() <= 1e-9);
}

TEST_CASE("modal and physical coordinates invert each other") {
  const auto sys = diagonalize(LinearizedPendulum::prototype());
  const Vec2 phys(0.1, -0.3);
  CHECK((sys.to_physical(sys.to_modal(phys)) - phys).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("quadrupling the inertia halves lambda1") {
  auto p = PendulumParams::prototype();
  const double base = linearize_and_diagonalize(p).lambda1;
  p.inertia *= 4.0;
  CHECK(linearize_and_diagonalize(p).lambda1 == doctest::Approx(base / 2.0).epsilon(1e-12));
}

TEST_CASE("physical linearization follows m g l / I") {
  const auto p = PendulumParams::prototype();
  const auto lp = linearize(p);
  CHECK(lp.stiffness == doctest::Approx(p.total_mass() * p.g_acc * p.l / p.inertia));
  CHECK(lp.input_gain == doctest::Approx(p.k_xi * p.l / p.inertia));
}

TEST_CASE("invalid pendulum parameters are rejected") {
  auto p = PendulumParams::prototype();
  p.inertia = 0.0;
  CHECK_THROWS_AS(linearize(p), ConfigError);
  CHECK_THROWS_AS(diagonalize(LinearizedPendulum{-1.0, 0.5}), ConfigError);
}

TEST_CASE("scalar linear step, Euler and exact") {
  CHECK(step_scalar_linear(oracle::lambda1, 0.0, 1.0, 0.0, 0.0, 0.003, Integrator::euler) ==
        doctest::Approx(oracle::euler_step).epsilon(1e-13));
  CHECK(step_scalar_linear(oracle::lambda1, 0.0, 1.0, 0.0, 0.0, 0.003, Integrator::exact) ==
        doctest::Approx(oracle::exp_step).epsilon(1e-13));
}

TEST_CASE("Euler and exact steps agree to second order") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> xs(-5.0, 5.0);
  for (double delta : {0.001, 0.003, 0.01}) {
    for (int i = 0; i < 1000; ++i) {
      const double x = xs(rng);
      const double e = step_scalar_linear(oracle::lambda1, 0.0, x, 0.0, 0.0, delta, Integrator::euler);
      const double ex = step_scalar_linear(oracle::lambda1, 0.0, x, 0.0, 0.0, delta, Integrator::exact);
      CHECK(std::abs(e - ex) <= oracle::lambda1 * oracle::lambda1 * delta * delta * std::abs(x));
    }
  }
}

TEST_CASE("exact step includes the forced response") {
  // x' = a x + c with x(0) = 0 gives x(t) = c (e^{a t} - 1) / a.
  const double a = 2.0, c = 0.7, t = 0.01;
  CHECK(step_scalar_linear(a, 1.0, 0.0, c, 0.0, t, Integrator::exact) ==
        doctest::Approx(c * std::expm1(a * t) / a).epsilon(1e-14));
}

TEST_CASE("demo plant equilibrium and Lipschitz bound") {
  const auto plant = ScalarNonlinearPlant::demo(0.1);
  CHECK(plant.rhs(0.0, 0.0, 0.0) == 0.0);
  CHECK(plant.L_x() == 3.0);
  CHECK(plant.L_w() == 1.0);
  CHECK(plant.jacobian(0.0) == doctest::Approx(3.0));
  CHECK(plant.jacobian(std::numbers::pi) == doctest::Approx(1.0));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> state(-20.0, 20.0);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  for (int i = 0; i < 10000; ++i) {
    const double x = state(rng), xh = state(rng), u = state(rng), w = dist(rng);
    CHECK(std::abs(plant.rhs(x, u, w) - plant.rhs(xh, u, 0.0)) <= 3.0 * std::abs(x - xh) + std::abs(w) + 1e-12);
  }
}

TEST_CASE("plant map identifiers parse") {
  CHECK(ScalarNonlinearPlant::parse_map("demo") == ScalarNonlinearPlant::Map::demo);
  CHECK(ScalarNonlinearPlant::parse_map(ScalarNonlinearPlant::unstable_linear(1.5, 0.1).rhs_id()) ==
        ScalarNonlinearPlant::Map::unstable_linear);
  CHECK_THROWS_AS(ScalarNonlinearPlant::parse_map("cubic"), ConfigError);
}

TEST_CASE("disturbance samples stay within the bound") {
  DisturbanceSource src(0.047, 12345);
  double lo = 0.0, hi = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const double w = src.sample();
    REQUIRE(std::abs(w) <= 0.047);
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  // The samples actually explore the interval.
  CHECK(lo < -0.046);
  CHECK(hi > 0.046);
}

TEST_CASE("zero bound gives zero disturbance") {
  DisturbanceSource src(0.0, 5);
  for (int i = 0; i < 100; ++i) CHECK(src.sample() == 0.0);
}

TEST_CASE("disturbance streams are reproducible") {
  DisturbanceSource a(0.1, 77), b(0.1, 77), c(0.1, 78);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double wa = a.sample();
    CHECK(wa == b.sample());
    differs = differs || wa != c.sample();
  }
  CHECK(differs);
}

TEST_CASE("worst-case disturbance sits at the bound") {
  DisturbanceSource src(0.05, 1, DisturbanceKind::worst_case);
  for (int i = 0; i < 10; ++i) CHECK(std::abs(src.sample()) == 0.05);
  CHECK(parse_disturbance_kind("worst-case") == DisturbanceKind::worst_case);
  CHECK_THROWS_AS(parse_disturbance_kind("gaussian"), ConfigError);
}
