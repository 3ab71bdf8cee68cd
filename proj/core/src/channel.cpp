#include "etcsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "etcsim/errors.hpp"

namespace etcsim {

namespace {

// Relative tolerance for deciding that gamma already sits on the delta grid.
constexpr double kGridTolerance = 1e-9;

}  // namespace

std::string_view to_string(DelayLaw law) {
  switch (law) {
    case DelayLaw::uniform:
      return "uniform";
    case DelayLaw::worst_case:
      return "worst-case";
  }
  return "uniform";
}

DelayLaw parse_delay_law(std::string_view text) {
  if (text == "uniform") return DelayLaw::uniform;
  if (text == "worst-case") return DelayLaw::worst_case;
  throw ConfigError("unknown delay law '" + std::string(text) + "' (expected uniform or worst-case)");
}

int ChannelConfig::max_delay_steps() const { return static_cast<int>(std::llround(gamma / delta)); }

void ChannelConfig::validate() const {
  if (!(delta > 0.0)) throw ConfigError("channel.delta_s must be > 0");
  if (min_delay_steps < 1) throw ConfigError("channel.min_delay_steps must be >= 1");
  const double steps = gamma / delta;
  if (std::abs(steps - std::round(steps)) > kGridTolerance * std::max(1.0, steps)) {
    throw ConfigError("channel.gamma_s must be a multiple of delta_s");
  }
  if (max_delay_steps() < min_delay_steps) {
    std::ostringstream os;
    os << "infeasible channel: gamma >= min_delay_steps * delta violated (gamma=" << gamma
       << ", min_delay_steps=" << min_delay_steps << ", delta=" << delta << ")";
    throw ConfigError(os.str());
  }
}

ChannelConfig make_channel_config(double gamma, double delta, int min_delay_steps, std::uint64_t seed,
                                  DelayLaw law, std::vector<std::string>* warnings) {
  if (!(delta > 0.0)) throw ConfigError("channel.delta_s must be > 0");
  if (!(gamma >= 0.0)) throw ConfigError("channel.gamma_s must be >= 0");
  const double steps = gamma / delta;
  double rounded_steps = std::round(steps);
  if (std::abs(steps - rounded_steps) > kGridTolerance * std::max(1.0, steps)) {
    rounded_steps = std::ceil(steps);
  }
  const double snapped = rounded_steps * delta;
  if (warnings != nullptr && std::abs(snapped - gamma) > kGridTolerance * std::max(delta, gamma)) {
    std::ostringstream os;
    os << "channel.gamma_s=" << gamma << " is not a multiple of delta_s=" << delta << "; rounded up to "
       << snapped;
    warnings->push_back(os.str());
  }
  ChannelConfig cfg{snapped, delta, min_delay_steps, seed, law};
  cfg.validate();
  return cfg;
}

Channel::Channel(ChannelConfig cfg)
    : cfg_(cfg), rng_(cfg.seed), delay_steps_(cfg.min_delay_steps, std::max(cfg.min_delay_steps, cfg.max_delay_steps())) {
  cfg_.validate();
}

const InFlight& Channel::send(Packet pkt) {
  if (slot_) {
    throw ProtocolError("send while packet " + std::to_string(slot_->packet.seq) + " is still in flight");
  }
  const int steps = cfg_.law == DelayLaw::worst_case ? cfg_.max_delay_steps() : delay_steps_(rng_);
  InFlight f;
  f.deliver_tick = pkt.send_tick + steps;
  f.t_deliver = static_cast<double>(f.deliver_tick) * cfg_.delta;
  f.packet = std::move(pkt);
  slot_ = std::move(f);
  return *slot_;
}

std::optional<Packet> Channel::poll(Tick now) {
  if (!slot_ || now < slot_->deliver_tick) return std::nullopt;
  Packet out = std::move(slot_->packet);
  slot_.reset();
  return out;
}

std::optional<Packet> Channel::poll(double now) { return poll(static_cast<Tick>(std::llround(now / cfg_.delta))); }

}  // namespace etcsim
