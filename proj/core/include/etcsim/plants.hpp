#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace etcsim {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Gain2 = Eigen::RowVector2d;

/// Physical description of the two-propeller inverted pendulum.
struct PendulumParams {
  double m1 = 0.0;       // pendulum mass (kg)
  double m2 = 0.0;       // motor mass (kg)
  double l = 0.0;        // length (m)
  double inertia = 0.0;  // moment of inertia about the pivot (kg m^2)
  double g_acc = 0.0;    // gravitational acceleration (m/s^2)
  double k_xi = 0.0;     // thrust per unit motor input (N)

  /// Throws ConfigError unless every field is strictly positive.
  void validate() const;
  [[nodiscard]] double total_mass() const noexcept { return m1 + m2; }

  /// The laboratory prototype.
  static PendulumParams prototype();
};

/// phi'' = stiffness * phi + input_gain * u  (small-angle model), or
/// phi'' = stiffness * sin(phi) + input_gain * u  (full model).
struct LinearizedPendulum {
  double stiffness = 0.0;   // m g l / I  (1/s^2)
  double input_gain = 0.0;  // k_xi l / I

  [[nodiscard]] Mat2 a_matrix() const;
  [[nodiscard]] Vec2 b_vector() const;

  /// Identified coefficients of the prototype (53.58 and 0.50). These are the
  /// values the controller design was carried out with; they are not what
  /// first-principles evaluation of PendulumParams::prototype() returns.
  static LinearizedPendulum prototype();
};

/// First-principles small-angle coefficients.
LinearizedPendulum linearize(const PendulumParams& p);

/// Modal form x = P^-1 x~ of the linearized pendulum:
///   x1' = lambda1 x1 + b1 u + w1   (unstable)
///   x2' = lambda2 x2 + b2 u + w2   (stable)
struct LinearDiagonalSystem {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Vec2 b = Vec2::Zero();
  Mat2 P = Mat2::Identity();
  Mat2 P_inv = Mat2::Identity();
  Mat2 a_physical = Mat2::Zero();  // companion matrix in (phi, phi') coordinates
  Vec2 b_physical = Vec2::Zero();
  double M = 0.0;            // disturbance bound per modal coordinate
  Gain2 K = Gain2::Zero();   // u = -K xhat

  [[nodiscard]] Mat2 a_diagonal() const;
  [[nodiscard]] Vec2 to_modal(const Vec2& physical) const { return P_inv * physical; }
  [[nodiscard]] Vec2 to_physical(const Vec2& modal) const { return P * modal; }
  /// ||P diag(lambda) P^-1 - A~||_inf / ||A~||_inf
  [[nodiscard]] double round_trip_error() const;
};

/// Eigen-decomposition of the companion matrix [[0,1],[a,0]], a > 0.
/// Eigenvalues are sorted positive first; eigenvectors have unit length with
/// a positive second component. M and K are left zero.
LinearDiagonalSystem diagonalize(const LinearizedPendulum& lp);
LinearDiagonalSystem linearize_and_diagonalize(const PendulumParams& p);

enum class Integrator { euler, exact };

/// One step of x' = lambda x + b u + w with zero-order hold on u and w.
double step_scalar_linear(double lambda, double b, double x, double u, double w, double delta,
                          Integrator integrator = Integrator::euler);

/// One step of the modal system (both coordinates).
Vec2 step_dynamics(const LinearDiagonalSystem& sys, const Vec2& x, double u, const Vec2& w,
                   double delta, Integrator integrator = Integrator::euler);

/// One forward-Euler step of the full nonlinear pendulum in (phi, phi')
/// coordinates; `w2` enters the angular acceleration.
Vec2 step_pendulum_nonlinear(const LinearizedPendulum& lp, const Vec2& state, double u, double w2,
                             double delta);

/// Scalar plant x' = f(x, u, w) with Lipschitz constants L_x, L_w.
class ScalarNonlinearPlant {
 public:
  enum class Map {
    demo,             // 2x + sin(x) + u + w
    unstable_linear,  // a x + u + w
  };

  ScalarNonlinearPlant(Map map, double L_x, double L_w, double M, double rate = 0.0);

  /// The demo map with L_x = 3, L_w = 1.
  static ScalarNonlinearPlant demo(double M);
  /// a x + u + w with L_x = a, L_w = 1.
  static ScalarNonlinearPlant unstable_linear(double a, double M);

  [[nodiscard]] double rhs(double x, double u, double w) const;
  /// d f / d x, the pointwise entropy rate of the map.
  [[nodiscard]] double jacobian(double x) const;
  /// One forward-Euler step.
  [[nodiscard]] double step(double x, double u, double w, double delta) const;

  [[nodiscard]] Map map() const noexcept { return map_; }
  [[nodiscard]] std::string_view rhs_id() const noexcept;
  [[nodiscard]] double L_x() const noexcept { return L_x_; }
  [[nodiscard]] double L_w() const noexcept { return L_w_; }
  [[nodiscard]] double M() const noexcept { return M_; }
  [[nodiscard]] double rate() const noexcept { return rate_; }

  static Map parse_map(std::string_view id);

 private:
  Map map_;
  double L_x_;
  double L_w_;
  double M_;
  double rate_;
};

enum class DisturbanceKind {
  uniform,     // independent uniform on [-M, M] each step
  worst_case,  // constant +M
  zero,
};

std::string_view to_string(DisturbanceKind kind);
DisturbanceKind parse_disturbance_kind(std::string_view text);

/// Bounded disturbance generator; one instance per simulated signal.
class DisturbanceSource {
 public:
  DisturbanceSource(double bound, std::uint64_t seed, DisturbanceKind kind = DisturbanceKind::uniform);

  /// Next sample; always within [-bound, bound].
  double sample();
  [[nodiscard]] double bound() const noexcept { return bound_; }

 private:
  double bound_;
  DisturbanceKind kind_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{-1.0, 1.0};
};

}  // namespace etcsim
