#include <doctest.h>

#include <cmath>

#include "etcsim/errors.hpp"
#include "etcsim/linear_etc.hpp"

using namespace etcsim;

namespace {

constexpr double kLambda1 = 7.319836063738039755;

LinearTriggerConfig paper_config(double gamma) {
  return LinearTriggerConfig::with_margin(0.1, 0.01, 1.00001, gamma, kLambda1, 0.047);
}

ChannelConfig channel(double gamma) { return ChannelConfig{gamma, 0.003, 2, 0, DelayLaw::uniform}; }

}  // namespace

TEST_CASE("packet size for the pendulum parameters") {
  // Reference values evaluated offline at 40 digits.
  const auto c2 = paper_config(0.006);
  CHECK(c2.J == doctest::Approx(0.128828424287320428).epsilon(1e-13));
  CHECK(linear_packet_size_exponent(c2) == doctest::Approx(3.569015040070023795).epsilon(1e-11));
  CHECK(linear_packet_size(c2) == 4);

  const auto c5 = paper_config(0.015);
  CHECK(c5.J == doctest::Approx(0.174515990679157853).epsilon(1e-13));
  CHECK(linear_packet_size_exponent(c5) == doctest::Approx(5.422247576132725207).epsilon(1e-11));
  CHECK(linear_packet_size(c5) == 6);

  CHECK(linear_packet_size_exponent(c5) > linear_packet_size_exponent(c2));
}

TEST_CASE("packet size falls back to one bit for tiny delay bounds") {
  for (double gamma : {1e-3, 1e-5, 1e-8}) {
    const LinearTriggerConfig cfg{0.1, 0.01, 1.00001, gamma, kLambda1, 0.0};
    CHECK(linear_packet_size(cfg) == 1);
  }
}

TEST_CASE("packet size grows with the delay bound") {
  int prev = 0;
  for (int steps = 2; steps <= 10; ++steps) {
    const int g = linear_packet_size(paper_config(0.003 * steps));
    CHECK(g >= prev);
    prev = g;
  }
}

TEST_CASE("infeasible thresholds are rejected with the inequality named") {
  auto cfg = paper_config(0.006);
  cfg.J = 0.5 * cfg.min_feasible_J();
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("J >") != std::string::npos);
  }
  auto bad_rho = paper_config(0.006);
  bad_rho.rho0 = 1.5;
  CHECK_THROWS_AS(bad_rho.validate(), ConfigError);
  auto bad_b = paper_config(0.006);
  bad_b.b = 1.0;
  CHECK_THROWS_AS(bad_b.validate(), ConfigError);
}

TEST_CASE("error envelope and one-step slack") {
  const auto cfg = paper_config(0.006);
  CHECK(linear_error_envelope(cfg) == doctest::Approx(0.134900812580259941).epsilon(1e-12));
  CHECK(linear_discrete_slack(cfg, 0.003) == doctest::Approx(0.003131279771089687).epsilon(1e-11));
}

TEST_CASE("minimum inter-trigger bound") {
  CHECK(min_intertrigger_bound(paper_config(0.006)) == doctest::Approx(0.391362107020451555).epsilon(1e-12));
  CHECK(min_intertrigger_bound(paper_config(0.015)) == doctest::Approx(0.423255481675112150).epsilon(1e-12));

  LinearTriggerConfig no_noise{0.1, 0.01, 1.00001, 0.006, kLambda1, 0.0};
  const double base = min_intertrigger_bound(no_noise);
  CHECK(base == doctest::Approx(std::log(100.0) / kLambda1));
  no_noise.J *= 2.0;
  CHECK(min_intertrigger_bound(no_noise) == doctest::Approx(base));

  LinearTriggerConfig almost_one{0.1, 0.999999, 1.00001, 0.006, kLambda1, 0.0};
  CHECK(min_intertrigger_bound(almost_one) < 1e-6);
}

TEST_CASE("trigger rule") {
  const auto cfg = paper_config(0.006);
  LinearSchemeState idle;
  CHECK(check_trigger(cfg.J, cfg, idle));
  CHECK(check_trigger(-cfg.J, cfg, idle));
  CHECK_FALSE(check_trigger(0.999 * cfg.J, cfg, idle));
  LinearSchemeState waiting;
  waiting.awaiting_ack = true;
  CHECK_FALSE(check_trigger(2.0 * cfg.J, cfg, waiting));
}

TEST_CASE("timing payload layout") {
  const TimingQuantizer sign_only(0.006, 1, 0.006);
  CHECK(sign_only.encode(0.123, +1).to_string() == "1");
  CHECK(sign_only.encode(0.123, -1).to_string() == "0");

  const TimingQuantizer q(0.015, 4, 0.006);
  CHECK(q.cells() == 8);
  CHECK(q.encode(0.300, +1).to_string() == "1000");
  CHECK(q.encode(0.300 + 0.015 * 5.0 / 8.0, -1).to_string() == "0101");
  CHECK(q.resolution() == doctest::Approx(0.015 / 16.0));
}

TEST_CASE("timing quantizer round trip over every grid send time and delay") {
  for (int steps : {2, 3, 5, 8}) {
    const double delta = 0.003;
    const double gamma = steps * delta;
    const ChannelConfig ch{gamma, delta, 2, 0, DelayLaw::uniform};
    const int g = linear_packet_size(paper_config(gamma));
    const TimingQuantizer q(gamma, g, ch.min_delay());
    REQUIRE(q.is_unambiguous());
    std::size_t checked = 0;
    for (Tick n = 0; n < (Tick{1} << 16); ++n) {
      const double ts = static_cast<double>(n) * delta;
      const auto payload = q.encode(ts, n % 3 == 0 ? -1 : 1);
      for (int d = ch.min_delay_steps; d <= ch.max_delay_steps(); ++d) {
        const auto dec = q.decode(payload, static_cast<double>(n + d) * delta);
        REQUIRE(std::abs(dec.q - ts) <= q.resolution() + 1e-12);
        REQUIRE(dec.sign == (n % 3 == 0 ? -1 : 1));
        ++checked;
      }
    }
    CHECK(checked >= (std::size_t{1} << 16));
  }
}

TEST_CASE("single admissible delay recovers the send time exactly") {
  const TimingQuantizer q(0.006, 1, 0.006);
  const auto dec = q.decode(q.encode(0.417, 1), 0.423);
  CHECK(dec.q == doctest::Approx(0.417).epsilon(1e-12));
}

TEST_CASE("decoder rejects payloads of the wrong length") {
  const TimingQuantizer q(0.015, 4, 0.006);
  CHECK_THROWS_AS((void)q.decode(BitString::parse("10"), 1.0), InvariantViolation);
}

TEST_CASE("ambiguous timing codes are rejected at construction") {
  // Two bits at gamma = 5 delta: cells of 7.5 ms exceed the 6 ms minimum delay.
  CHECK_THROWS_AS(LinearEtc(paper_config(0.015), channel(0.015), 2), ConfigError);
  CHECK_NOTHROW(LinearEtc(paper_config(0.015), channel(0.015)));
}

TEST_CASE("one packet at a time and late packets are caught") {
  LinearEtc scheme(paper_config(0.015), channel(0.015));
  const auto pkt = scheme.make_packet(0, 100, 0.3, 0.2);
  CHECK(scheme.state().awaiting_ack);
  CHECK_FALSE(scheme.should_trigger(1.0));
  CHECK_THROWS_AS(scheme.make_packet(1, 101, 0.303, 0.2), ProtocolError);
  CHECK_THROWS_AS(scheme.decode_and_jump(pkt, 0.3 + 0.018), InvariantViolation);
  const double jump = scheme.decode_and_jump(pkt, 0.309);
  CHECK(jump > scheme.config().J);
  CHECK_FALSE(scheme.state().awaiting_ack);
}

TEST_CASE("jump lands within rho0 J when the error grows deterministically") {
  // With M = 0 the error after a trigger at t_s is J e^{lambda1 (t - t_s)}
  // exactly, so the residual after the jump is set by the timing error alone.
  for (int steps : {2, 5}) {
    const double delta = 0.003, gamma = steps * delta;
    LinearTriggerConfig cfg{0.1288, 0.01, 1.00001, gamma, kLambda1, 0.0};
    LinearEtc scheme(cfg, channel(gamma));
    for (Tick n = 1; n < 5000; n += 7) {
      const double ts = static_cast<double>(n) * delta;
      for (int d = 2; d <= steps; ++d) {
        const double tc = static_cast<double>(n + d) * delta;
        const auto pkt = scheme.make_packet(static_cast<std::uint64_t>(n), n, ts, cfg.J);
        const double z_before = cfg.J * std::exp(kLambda1 * (tc - ts));
        const double z_after = z_before - scheme.decode_and_jump(pkt, tc);
        REQUIRE(std::abs(z_after) <= cfg.rho0 * cfg.J);
      }
    }
  }
}
