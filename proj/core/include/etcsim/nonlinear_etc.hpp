#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "etcsim/bits.hpp"
#include "etcsim/channel.hpp"
#include "etcsim/plants.hpp"

namespace etcsim {

/// Periodic event-triggering parameters for a scalar Lipschitz plant.
struct NonlinearTriggerConfig {
  double J = 0.0;      // threshold
  double alpha = 0.0;  // period margin (s); candidates at k (alpha + gamma)
  double gamma = 0.0;  // channel delay bound (s)
  double L_x = 0.0;
  double L_w = 0.0;
  double M = 0.0;

  /// (L_w M / L_x)(e^{L_x gamma} - 1)
  [[nodiscard]] double min_feasible_J() const;
  /// Throws ConfigError naming the violated inequality.
  void validate() const;
  [[nodiscard]] double period() const noexcept { return alpha + gamma; }

  /// J = (L_w M / L_x)(e^{L_x gamma} - 1) + margin.
  static NonlinearTriggerConfig with_margin(double margin, double alpha, double gamma, double L_x, double L_w,
                                            double M);
};

/// Upsilon(theta) with the disturbance magnitude `wbound`:
///   J e^{L_x(alpha+gamma+theta)} + (L_w wbound / L_x)(e^{L_x(alpha+gamma+theta)} - 1).
double upsilon(const NonlinearTriggerConfig& cfg, double theta, double wbound);

struct UpsilonBounds {
  double upsilon0 = 0.0;       // bound on |z| at candidate times
  double upsilon_gamma = 0.0;  // bound on |z| everywhere

  static UpsilonBounds of(const NonlinearTriggerConfig& cfg);
};

struct NonlinearPacketSize {
  double ratio = 0.0;       // Upsilon(0) e^{L_x gamma} / (J - (L_w M/L_x)(e^{L_x gamma} - 1))
  double real_bound = 0.0;  // max{0, log2 ratio}
  int bits = 1;             // max{1, ceil(log2 ratio)}
};

/// Theorem-level real lower bound and the deployable integer packet size.
/// Throws ConfigError if J does not strictly exceed the feasibility bound.
NonlinearPacketSize nonlinear_packet_size(const NonlinearTriggerConfig& cfg);

struct RateBound {
  double deployable = 0.0;  // g / (alpha + gamma)
  double theorem = 0.0;     // real_bound / (alpha + gamma)
};

RateBound rate_lower_bound(const NonlinearTriggerConfig& cfg, int bits);

/// |z(t_s^k)| >= J
bool periodic_trigger(double z, const NonlinearTriggerConfig& cfg);

/// Uniform quantizer of [-range, range] into 2^g cells, decoded to the cell
/// center. g = 0 is the single-symbol alphabet (center 0).
class ZQuantizer {
 public:
  ZQuantizer(double range, int bits);

  /// Throws InvariantViolation if |z| exceeds the range by more than
  /// `tolerance`; values inside the tolerance are clamped to the edge cell.
  [[nodiscard]] BitString encode(double z, double tolerance = 0.0) const;
  [[nodiscard]] std::uint64_t cell_of(double z, double tolerance = 0.0) const;
  [[nodiscard]] double decode(const BitString& payload) const;
  [[nodiscard]] double center(std::uint64_t cell) const;

  [[nodiscard]] int bits() const noexcept { return bits_; }
  [[nodiscard]] double range() const noexcept { return range_; }
  /// range / 2^g
  [[nodiscard]] double max_error() const noexcept { return range_ / static_cast<double>(cells_); }

 private:
  double range_;
  int bits_;
  std::uint64_t cells_;
};

/// Integrates xbar' = f(xbar, u, 0) forward from `xbar_send` using the input
/// recorded on each grid step between send and reception.
double reconstruct(const ScalarNonlinearPlant& plant, double xbar_send, std::span<const double> inputs,
                   double delta);

/// Sensor/controller pair of the periodic scheme.
class NonlinearEtc {
 public:
  NonlinearEtc(NonlinearTriggerConfig cfg, ScalarNonlinearPlant plant, const ChannelConfig& channel,
               std::optional<int> bits = std::nullopt);

  /// Candidate ticks are the positive multiples of period_ticks().
  [[nodiscard]] bool is_candidate(Tick tick) const noexcept { return tick > 0 && tick % period_ticks_ == 0; }
  [[nodiscard]] std::uint64_t candidate_index(Tick tick) const noexcept {
    return static_cast<std::uint64_t>(tick / period_ticks_);
  }
  [[nodiscard]] Tick period_ticks() const noexcept { return period_ticks_; }
  [[nodiscard]] bool should_trigger(double z) const { return periodic_trigger(z, cfg_); }

  /// Quantizes z(t_s) and remembers xhat(t_s) for the reconstruction.
  /// `tolerance` is the slack allowed on |z| <= Upsilon(0) before an
  /// InvariantViolation is raised.
  Packet make_packet(std::uint64_t k, Tick tick, double t_send, double z, double xhat_send, double tolerance);

  /// Input applied on the grid step starting at `tick`; only kept while a
  /// packet is in flight.
  void record_input(double u);

  /// xhat(t_c+) from the packet and the recorded inputs.
  double reconstruct_and_jump(const Packet& pkt, Tick receive_tick);

  [[nodiscard]] bool awaiting_ack() const noexcept { return awaiting_; }
  [[nodiscard]] const NonlinearTriggerConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const ZQuantizer& quantizer() const noexcept { return quantizer_; }
  [[nodiscard]] const UpsilonBounds& bounds() const noexcept { return bounds_; }
  [[nodiscard]] int bits() const noexcept { return quantizer_.bits(); }

 private:
  NonlinearTriggerConfig cfg_;
  ScalarNonlinearPlant plant_;
  double delta_;
  Tick period_ticks_;
  UpsilonBounds bounds_;
  ZQuantizer quantizer_;
  bool awaiting_ = false;
  double xhat_send_ = 0.0;
  std::vector<double> inputs_;
};

}  // namespace etcsim
