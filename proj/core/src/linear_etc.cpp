#include "etcsim/linear_etc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "etcsim/errors.hpp"

namespace etcsim {

namespace {

constexpr double kSnap = 1e-9;

// Floor of s, treating values within kSnap of an integer as that integer.
double snapped_floor(double s) {
  const double r = std::round(s);
  if (std::abs(s - r) < kSnap * std::max(1.0, std::abs(s))) return r;
  return std::floor(s);
}

}  // namespace

double LinearTriggerConfig::min_feasible_J() const { return M / (lambda1 * rho0) * std::expm1(lambda1 * gamma); }

void LinearTriggerConfig::validate() const {
  if (!(lambda1 > 0.0)) throw ConfigError("linear scheme needs lambda1 > 0");
  if (!(rho0 > 0.0 && rho0 < 1.0)) throw ConfigError("linear.rho0 must satisfy 0 < rho0 < 1");
  if (!(b > 1.0)) throw ConfigError("linear.b must satisfy b > 1");
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
  if (!(M >= 0.0)) throw ConfigError("disturbance bound M must be >= 0");
  if (!(J > min_feasible_J())) {
    std::ostringstream os;
    os << "infeasible threshold: J > (M/(lambda1 rho0))(e^{lambda1 gamma} - 1) violated (J=" << J
       << ", bound=" << min_feasible_J() << ")";
    throw ConfigError(os.str());
  }
}

LinearTriggerConfig LinearTriggerConfig::with_margin(double margin, double rho0, double b, double gamma,
                                                     double lambda1, double M) {
  LinearTriggerConfig cfg{0.0, rho0, b, gamma, lambda1, M};
  cfg.J = cfg.min_feasible_J() + margin;
  return cfg;
}

double linear_packet_size_exponent(const LinearTriggerConfig& cfg) {
  cfg.validate();
  const double growth = std::exp(cfg.lambda1 * cfg.gamma);
  const double slack = cfg.rho0 - (cfg.M / (cfg.J * cfg.lambda1)) * std::expm1(cfg.lambda1 * cfg.gamma);
  const double denom = std::log1p(slack / growth);
  if (!(denom > 0.0)) {
    throw ConfigError("infeasible packet size: rho0 > (M/(J lambda1))(e^{lambda1 gamma} - 1) violated");
  }
  const double ratio = cfg.lambda1 * cfg.b * cfg.gamma / denom;
  if (ratio <= 0.0) return -HUGE_VAL;  // gamma == 0: timing is exact
  return 1.0 + std::log2(ratio);
}

int linear_packet_size(const LinearTriggerConfig& cfg) {
  const double exponent = linear_packet_size_exponent(cfg);
  if (!(exponent > 1.0)) return 1;
  const double bits = std::ceil(exponent);
  if (bits > BitString::kMaxBits) throw ConfigError("packet size exceeds 64 bits");
  return static_cast<int>(bits);
}

double min_intertrigger_bound(const LinearTriggerConfig& cfg) {
  const double drift = cfg.M / cfg.lambda1;
  return std::log((cfg.J + drift) / (cfg.rho0 * cfg.J + drift)) / cfg.lambda1;
}

double linear_error_envelope(const LinearTriggerConfig& cfg) {
  return cfg.J * std::exp(cfg.lambda1 * cfg.gamma) + cfg.M / cfg.lambda1 * std::expm1(cfg.lambda1 * cfg.gamma);
}

double linear_discrete_slack(const LinearTriggerConfig& cfg, double delta) {
  return std::expm1(cfg.lambda1 * delta) * (cfg.J * std::exp(cfg.lambda1 * cfg.gamma) + cfg.M / cfg.lambda1);
}

TimingQuantizer::TimingQuantizer(double gamma, int bits, double min_delay)
    : gamma_(gamma), bits_(bits), cells_(0), min_delay_(min_delay) {
  if (bits < 1) throw ConfigError("timing packet needs at least the sign bit (g >= 1)");
  if (bits > static_cast<int>(BitString::kMaxBits)) throw ConfigError("packet size exceeds 64 bits");
  if (!(gamma > 0.0)) throw ConfigError("timing quantizer needs gamma > 0");
  cells_ = 1ULL << (bits - 1);
}

bool TimingQuantizer::is_unambiguous() const noexcept {
  return cell_width() <= min_delay_ * (1.0 + kSnap) || min_delay_ >= gamma_ * (1.0 - kSnap);
}

std::uint64_t TimingQuantizer::cell_of(double t) const {
  const double periods = t / gamma_;
  const double phase = periods - snapped_floor(periods);  // in [0, 1)
  const double n = static_cast<double>(cells_);
  auto idx = static_cast<std::int64_t>(snapped_floor(phase * n));
  idx = std::clamp<std::int64_t>(idx, 0, static_cast<std::int64_t>(cells_) - 1);
  return static_cast<std::uint64_t>(idx);
}

BitString TimingQuantizer::encode(double t_send, int sign) const {
  BitString out;
  out.push_back(sign >= 0);
  if (bits_ > 1) {
    const BitString cell = BitString::from_uint(cell_of(t_send), static_cast<unsigned>(bits_ - 1));
    for (unsigned i = 0; i < cell.size(); ++i) out.push_back(cell[i]);
  }
  return out;
}

TimingQuantizer::Decoded TimingQuantizer::decode(const BitString& payload, double t_receive) const {
  if (payload.size() != static_cast<unsigned>(bits_)) {
    throw InvariantViolation("timing payload length differs from the declared packet size");
  }
  Decoded out;
  out.sign = payload[0] ? 1 : -1;
  const std::uint64_t cell = bits_ > 1 ? payload.slice(1, static_cast<unsigned>(bits_ - 1)) : 0;
  const double width = cell_width();
  const double cell_lo = static_cast<double>(cell) * width;

  const double lo = t_receive - gamma_;
  const double hi = t_receive - min_delay_;
  const double tol = kSnap * std::max(1.0, std::abs(t_receive));

  struct Piece {
    double a;
    double b;
  };
  std::vector<Piece> pieces;
  const auto first = static_cast<std::int64_t>(std::floor((lo - cell_lo - width) / gamma_)) - 1;
  const auto last = static_cast<std::int64_t>(std::ceil((hi - cell_lo) / gamma_)) + 1;
  for (std::int64_t m = first; m <= last; ++m) {
    const double start = cell_lo + static_cast<double>(m) * gamma_;
    const double a = std::max(lo, start);
    const double b = std::min(hi, start + width);
    if (b - a > -tol) pieces.push_back({a, std::max(a, b)});
  }
  if (pieces.size() > 1) {
    // Cells are half-open; drop zero-length contacts at a neighbouring cell edge.
    std::vector<Piece> proper;
    for (const auto& p : pieces) {
      if (p.b - p.a > tol) proper.push_back(p);
    }
    if (proper.size() == 1) pieces = proper;
  }
  if (pieces.empty()) throw InvariantViolation("timing payload inconsistent with the reception window");
  if (pieces.size() > 1) throw InvariantViolation("timing payload ambiguous within the reception window");
  out.q = 0.5 * (pieces.front().a + pieces.front().b);
  return out;
}

bool check_trigger(double z1, const LinearTriggerConfig& cfg, const LinearSchemeState& state) {
  return !state.awaiting_ack && std::abs(z1) >= cfg.J;
}

LinearEtc::LinearEtc(LinearTriggerConfig cfg, const ChannelConfig& channel, std::optional<int> bits)
    : cfg_(cfg),
      quantizer_(channel.gamma, bits.value_or(linear_packet_size(cfg)), channel.min_delay()) {
  cfg_.validate();
  if (!quantizer_.is_unambiguous()) {
    std::ostringstream os;
    os << "timing cell width gamma/2^{g-1}=" << quantizer_.cell_width()
       << " exceeds the minimum channel delay " << channel.min_delay() << "; decoding would be ambiguous";
    throw ConfigError(os.str());
  }
}

Packet LinearEtc::make_packet(std::uint64_t seq, Tick tick, double t_send, double z1) {
  if (state_.awaiting_ack) throw ProtocolError("linear scheme triggered while awaiting acknowledgment");
  const int sign = z1 >= 0.0 ? 1 : -1;
  Packet pkt{seq, quantizer_.encode(t_send, sign), tick, t_send};
  state_.last_trigger = LinearSchemeState::Trigger{t_send, sign};
  state_.awaiting_ack = true;
  return pkt;
}

double LinearEtc::jump_value(int sign, double t_receive, double q) const {
  return static_cast<double>(sign) * cfg_.J * std::exp(cfg_.lambda1 * (t_receive - q));
}

double LinearEtc::decode_and_jump(const Packet& pkt, double t_receive) {
  if (t_receive - pkt.t_send > cfg_.gamma * (1.0 + kSnap) + kSnap) {
    throw InvariantViolation("packet delivered later than the delay bound");
  }
  const auto decoded = quantizer_.decode(pkt.payload, t_receive);
  state_.awaiting_ack = false;
  state_.reception_times.push_back(t_receive);
  return jump_value(decoded.sign, t_receive, decoded.q);
}

}  // namespace etcsim
