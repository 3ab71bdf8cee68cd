#include "etcsim/nonlinear_etc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "etcsim/errors.hpp"

namespace etcsim {

namespace {

constexpr double kSnap = 1e-9;

Tick ticks_ceil(double duration, double delta) {
  const double steps = duration / delta;
  const double r = std::round(steps);
  if (std::abs(steps - r) < kSnap * std::max(1.0, steps)) return static_cast<Tick>(r);
  return static_cast<Tick>(std::ceil(steps));
}

}  // namespace

double NonlinearTriggerConfig::min_feasible_J() const { return L_w * M / L_x * std::expm1(L_x * gamma); }

void NonlinearTriggerConfig::validate() const {
  if (!(L_x > 0.0) || !(L_w > 0.0)) throw ConfigError("Lipschitz constants must satisfy L_x > 0, L_w > 0");
  if (!(alpha >= 0.0)) throw ConfigError("nonlinear.alpha_s must be >= 0");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (!(M >= 0.0)) throw ConfigError("disturbance bound M must be >= 0");
  if (!(J > 0.0)) throw ConfigError("threshold J must be > 0");
  if (!(J > min_feasible_J())) {
    std::ostringstream os;
    os << "infeasible threshold: J > (L_w M / L_x)(e^{L_x gamma} - 1) violated (J=" << J
       << ", bound=" << min_feasible_J() << ")";
    throw ConfigError(os.str());
  }
}

NonlinearTriggerConfig NonlinearTriggerConfig::with_margin(double margin, double alpha, double gamma, double L_x,
                                                           double L_w, double M) {
  NonlinearTriggerConfig cfg{0.0, alpha, gamma, L_x, L_w, M};
  cfg.J = cfg.min_feasible_J() + margin;
  return cfg;
}

double upsilon(const NonlinearTriggerConfig& cfg, double theta, double wbound) {
  const double span = cfg.alpha + cfg.gamma + theta;
  return cfg.J * std::exp(cfg.L_x * span) + cfg.L_w * wbound / cfg.L_x * std::expm1(cfg.L_x * span);
}

UpsilonBounds UpsilonBounds::of(const NonlinearTriggerConfig& cfg) {
  return UpsilonBounds{upsilon(cfg, 0.0, cfg.M), upsilon(cfg, cfg.gamma, cfg.M)};
}

NonlinearPacketSize nonlinear_packet_size(const NonlinearTriggerConfig& cfg) {
  cfg.validate();
  const double margin = cfg.J - cfg.min_feasible_J();
  NonlinearPacketSize out;
  out.ratio = upsilon(cfg, 0.0, cfg.M) * std::exp(cfg.L_x * cfg.gamma) / margin;
  const double exponent = std::log2(out.ratio);
  out.real_bound = std::max(0.0, exponent);
  const double bits = std::max(1.0, std::ceil(exponent));
  if (bits > BitString::kMaxBits) throw ConfigError("packet size exceeds 64 bits");
  out.bits = static_cast<int>(bits);
  return out;
}

RateBound rate_lower_bound(const NonlinearTriggerConfig& cfg, int bits) {
  const auto size = nonlinear_packet_size(cfg);
  return RateBound{static_cast<double>(bits) / cfg.period(), size.real_bound / cfg.period()};
}

bool periodic_trigger(double z, const NonlinearTriggerConfig& cfg) { return std::abs(z) >= cfg.J; }

ZQuantizer::ZQuantizer(double range, int bits) : range_(range), bits_(bits), cells_(0) {
  if (bits < 0 || bits > static_cast<int>(BitString::kMaxBits) - 1) {
    throw ConfigError("z quantizer packet size must be within [0, 63] bits");
  }
  if (!(range > 0.0)) throw ConfigError("z quantizer range must be > 0");
  cells_ = 1ULL << bits;
}

std::uint64_t ZQuantizer::cell_of(double z, double tolerance) const {
  if (std::abs(z) > range_ + tolerance || !std::isfinite(z)) {
    std::ostringstream os;
    os << "|z(t_s)|=" << std::abs(z) << " outside the quantizer range " << range_ << " (+" << tolerance
       << " slack): error envelope breached";
    throw InvariantViolation(os.str());
  }
  const double clamped = std::clamp(z, -range_, range_);
  const double scaled = (clamped + range_) / (2.0 * range_) * static_cast<double>(cells_);
  const auto idx = static_cast<std::int64_t>(std::floor(scaled));
  return static_cast<std::uint64_t>(std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(cells_) - 1));
}

BitString ZQuantizer::encode(double z, double tolerance) const {
  return BitString::from_uint(cell_of(z, tolerance), static_cast<unsigned>(bits_));
}

double ZQuantizer::center(std::uint64_t cell) const {
  const double width = 2.0 * range_ / static_cast<double>(cells_);
  return -range_ + (static_cast<double>(cell) + 0.5) * width;
}

double ZQuantizer::decode(const BitString& payload) const {
  if (payload.size() != static_cast<unsigned>(bits_)) {
    throw InvariantViolation("z payload length differs from the declared packet size");
  }
  return center(payload.to_uint());
}

double reconstruct(const ScalarNonlinearPlant& plant, double xbar_send, std::span<const double> inputs,
                   double delta) {
  double x = xbar_send;
  for (double u : inputs) x = plant.step(x, u, 0.0, delta);
  return x;
}

NonlinearEtc::NonlinearEtc(NonlinearTriggerConfig cfg, ScalarNonlinearPlant plant, const ChannelConfig& channel,
                           std::optional<int> bits)
    : cfg_(cfg),
      plant_(plant),
      delta_(channel.delta),
      period_ticks_(ticks_ceil(cfg.period(), channel.delta)),
      bounds_(UpsilonBounds::of(cfg)),
      quantizer_(bounds_.upsilon0, bits.value_or(nonlinear_packet_size(cfg).bits)) {
  cfg_.validate();
  if (period_ticks_ < 1) throw ConfigError("triggering period alpha + gamma must be at least one sampling step");
  if (period_ticks_ < channel.max_delay_steps()) {
    throw ConfigError("triggering period shorter than the channel delay bound");
  }
}

Packet NonlinearEtc::make_packet(std::uint64_t k, Tick tick, double t_send, double z, double xhat_send,
                                 double tolerance) {
  if (awaiting_) throw ProtocolError("nonlinear scheme triggered while a packet is in flight");
  Packet pkt{k, quantizer_.encode(z, tolerance), tick, t_send};
  awaiting_ = true;
  xhat_send_ = xhat_send;
  inputs_.clear();
  return pkt;
}

void NonlinearEtc::record_input(double u) {
  if (awaiting_) inputs_.push_back(u);
}

double NonlinearEtc::reconstruct_and_jump(const Packet& pkt, Tick receive_tick) {
  if (!awaiting_) throw InvariantViolation("reception without a pending packet");
  // The send time is implied by the schedule: t_s = k (alpha + gamma).
  const Tick send_tick = static_cast<Tick>(pkt.seq) * period_ticks_;
  const auto steps = receive_tick - send_tick;
  if (steps < 0 || static_cast<std::size_t>(steps) != inputs_.size()) {
    throw InvariantViolation("input history does not cover the send-to-reception interval");
  }
  const double zbar = quantizer_.decode(pkt.payload);
  const double xbar = zbar + xhat_send_;
  awaiting_ = false;
  return reconstruct(plant_, xbar, inputs_, delta_);
}

}  // namespace etcsim
