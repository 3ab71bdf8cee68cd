#include <doctest.h>

#include <algorithm>

#include "etcsim/validation.hpp"

using namespace etcsim;

TEST_CASE("validation suite covers every module and passes") {
  const auto checks = run_validation(ValidationOptions{25, 0});
  for (const char* prefix : {"config/", "plants/", "channel/", "quantizer/", "metrics/", "runs/", "cli/"}) {
    const bool present = std::any_of(checks.begin(), checks.end(),
                                     [&](const ValidationCheck& c) { return c.name.rfind(prefix, 0) == 0; });
    CAPTURE(prefix);
    CHECK(present);
  }
  for (const auto& c : checks) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("protocol check flags overlapping packets") {
  SimTrace trace;
  trace.bounds.gamma = 0.015;
  trace.sends.push_back(SendEvent{.seq = 0, .tick = 10, .t = 0.03});
  trace.sends.push_back(SendEvent{.seq = 1, .tick = 12, .t = 0.036});
  trace.receptions.push_back(ReceptionEvent{.seq = 0, .send_tick = 10, .tick = 14, .t_send = 0.03, .t = 0.042});
  std::string detail;
  CHECK(check_protocol(trace, &detail) == 1);
  CHECK(detail.find("in flight") != std::string::npos);
}

TEST_CASE("protocol check flags late deliveries") {
  SimTrace trace;
  trace.bounds.gamma = 0.006;
  trace.sends.push_back(SendEvent{.seq = 0, .tick = 10, .t = 0.03});
  trace.receptions.push_back(ReceptionEvent{.seq = 0, .send_tick = 10, .tick = 13, .t_send = 0.03, .t = 0.039});
  CHECK(check_protocol(trace) == 1);
}
