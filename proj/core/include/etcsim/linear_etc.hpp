#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "etcsim/bits.hpp"
#include "etcsim/channel.hpp"

namespace etcsim {

/// Threshold-triggering parameters for the unstable modal coordinate.
struct LinearTriggerConfig {
  double J = 0.0;       // triggering threshold
  double rho0 = 0.0;    // post-reception contraction factor, 0 < rho0 < 1
  double b = 0.0;       // timing safety factor, > 1
  double gamma = 0.0;   // channel delay bound (s)
  double lambda1 = 0.0; // unstable eigenvalue (1/s)
  double M = 0.0;       // disturbance bound

  /// (M / (lambda1 rho0)) (e^{lambda1 gamma} - 1); J must exceed this.
  [[nodiscard]] double min_feasible_J() const;
  /// Throws ConfigError naming the violated inequality.
  void validate() const;

  /// J = min_feasible_J + margin.
  static LinearTriggerConfig with_margin(double margin, double rho0, double b, double gamma, double lambda1,
                                         double M);
};

/// Packet size (bits, >= 1) that guarantees |z1(t_c+)| <= rho0 J.
int linear_packet_size(const LinearTriggerConfig& cfg);

/// The real number inside the ceiling of the packet-size rule,
/// 1 + log2(lambda1 b gamma / ln(1 + (rho0 - (M/(J lambda1))(e^{lambda1 gamma}-1)) / e^{lambda1 gamma})).
double linear_packet_size_exponent(const LinearTriggerConfig& cfg);

/// Lower bound on the time between consecutive triggers.
double min_intertrigger_bound(const LinearTriggerConfig& cfg);

/// J e^{lambda1 gamma} + (M/lambda1)(e^{lambda1 gamma} - 1): bound on |z1(t)|.
double linear_error_envelope(const LinearTriggerConfig& cfg);

/// One-step discretization slack (e^{lambda1 delta} - 1)(J e^{lambda1 gamma} + M / lambda1).
double linear_discrete_slack(const LinearTriggerConfig& cfg, double delta);

/// Timing quantizer: one sign bit followed by g-1 bits locating t_s mod gamma
/// on a uniform grid of 2^{g-1} cells.
///
/// The decoder intersects the cell with the window of admissible send times
/// [t_c - gamma, t_c - min_delay] and returns the midpoint of that
/// intersection. The result is unique when the cell width does not exceed
/// min_delay (see is_unambiguous()); then |t_s - q| <= gamma / 2^g.
class TimingQuantizer {
 public:
  TimingQuantizer(double gamma, int bits, double min_delay);

  struct Decoded {
    int sign = 1;
    double q = 0.0;  // estimate of the send time
  };

  [[nodiscard]] BitString encode(double t_send, int sign) const;
  /// Throws InvariantViolation when no (or more than one) admissible send
  /// time matches the payload.
  [[nodiscard]] Decoded decode(const BitString& payload, double t_receive) const;

  /// Index of the cell that holds t mod gamma.
  [[nodiscard]] std::uint64_t cell_of(double t) const;

  [[nodiscard]] int bits() const noexcept { return bits_; }
  [[nodiscard]] std::uint64_t cells() const noexcept { return cells_; }
  [[nodiscard]] double cell_width() const noexcept { return gamma_ / static_cast<double>(cells_); }
  /// gamma / 2^g, the decode error bound.
  [[nodiscard]] double resolution() const noexcept { return 0.5 * cell_width(); }
  [[nodiscard]] bool is_unambiguous() const noexcept;

 private:
  double gamma_;
  int bits_;
  std::uint64_t cells_;
  double min_delay_;
};

struct LinearSchemeState {
  struct Trigger {
    double t_send = 0.0;
    int sign = 1;
  };
  std::optional<Trigger> last_trigger;
  bool awaiting_ack = false;
  std::vector<double> reception_times;
};

/// |z1| >= J and nothing in flight.
bool check_trigger(double z1, const LinearTriggerConfig& cfg, const LinearSchemeState& state);

/// Sensor/controller pair of the threshold scheme. The sensor's copy of the
/// estimate is kept identical to the controller's: both apply the same jump at
/// the reception time.
class LinearEtc {
 public:
  /// `bits` overrides the packet size (e.g. to study undersized packets).
  LinearEtc(LinearTriggerConfig cfg, const ChannelConfig& channel, std::optional<int> bits = std::nullopt);

  [[nodiscard]] bool should_trigger(double z1) const { return check_trigger(z1, cfg_, state_); }

  /// Builds the packet for a trigger at `tick` and marks the scheme as
  /// awaiting delivery.
  Packet make_packet(std::uint64_t seq, Tick tick, double t_send, double z1);

  /// Decodes the packet and returns the jump zbar1(t_c) to add to xhat1.
  double decode_and_jump(const Packet& pkt, double t_receive);

  /// sign * J * e^{lambda1 (t_c - q)}
  [[nodiscard]] double jump_value(int sign, double t_receive, double q) const;

  [[nodiscard]] const LinearTriggerConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const LinearSchemeState& state() const noexcept { return state_; }
  [[nodiscard]] const TimingQuantizer& quantizer() const noexcept { return quantizer_; }
  [[nodiscard]] int bits() const noexcept { return quantizer_.bits(); }

 private:
  LinearTriggerConfig cfg_;
  TimingQuantizer quantizer_;
  LinearSchemeState state_;
};

}  // namespace etcsim
