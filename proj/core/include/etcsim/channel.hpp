#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "etcsim/bits.hpp"

namespace etcsim {

/// Integer index on the sampling grid; time = tick * delta.
using Tick = std::int64_t;

struct Packet {
  std::uint64_t seq = 0;
  BitString payload;
  Tick send_tick = 0;
  double t_send = 0.0;
};

enum class DelayLaw {
  uniform,     // uniform over {min_delay_steps, ..., gamma/delta}
  worst_case,  // always gamma
};

std::string_view to_string(DelayLaw law);
DelayLaw parse_delay_law(std::string_view text);

struct ChannelConfig {
  double gamma = 0.0;       // delay bound (s), a multiple of delta
  double delta = 0.0;       // sampling time (s)
  int min_delay_steps = 2;  // 2 in hardware-faithful mode, >= 1 otherwise
  std::uint64_t seed = 0;
  DelayLaw law = DelayLaw::uniform;

  /// gamma / delta (exact after make_channel_config).
  [[nodiscard]] int max_delay_steps() const;
  [[nodiscard]] double min_delay() const { return min_delay_steps * delta; }
  /// Throws ConfigError when gamma < min_delay_steps * delta or gamma is off-grid.
  void validate() const;
};

/// Builds a config, rounding gamma up to the next multiple of delta. A note is
/// appended to `warnings` when rounding changed the value.
ChannelConfig make_channel_config(double gamma, double delta, int min_delay_steps, std::uint64_t seed,
                                  DelayLaw law, std::vector<std::string>* warnings = nullptr);

struct InFlight {
  Packet packet;
  Tick deliver_tick = 0;
  double t_deliver = 0.0;
};

/// Error-free packet channel with bounded random delay and a single in-flight
/// slot.
class Channel {
 public:
  explicit Channel(ChannelConfig cfg);

  /// Throws ProtocolError if a packet is already in flight.
  const InFlight& send(Packet pkt);

  /// Delivers the in-flight packet once `now` has reached its delivery tick.
  std::optional<Packet> poll(Tick now);
  /// Time-based overload; `now` is snapped to the nearest grid tick.
  std::optional<Packet> poll(double now);

  [[nodiscard]] bool busy() const noexcept { return slot_.has_value(); }
  [[nodiscard]] const std::optional<InFlight>& in_flight() const noexcept { return slot_; }
  [[nodiscard]] const ChannelConfig& config() const noexcept { return cfg_; }

 private:
  ChannelConfig cfg_;
  std::mt19937_64 rng_;
  std::uniform_int_distribution<int> delay_steps_;
  std::optional<InFlight> slot_;
};

}  // namespace etcsim
