#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "etcsim/bits.hpp"
#include "etcsim/channel.hpp"
#include "etcsim/scenario.hpp"

namespace etcsim {

/// State of the loop at the start of one sampling step, after any reception
/// at that instant has been applied. For the scalar scheme x2/xhat2/w2 and
/// phi/phidot are zero.
struct StepRecord {
  double t = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double xhat1 = 0.0;
  double xhat2 = 0.0;
  double z = 0.0;  // x1 - xhat1
  double u = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double phi = 0.0;
  double phidot = 0.0;
};

struct SendEvent {
  std::uint64_t seq = 0;
  Tick tick = 0;
  double t = 0.0;
  int bits = 0;
  BitString payload;
  double z = 0.0;  // error at the send instant
};

struct ReceptionEvent {
  std::uint64_t seq = 0;
  Tick send_tick = 0;
  Tick tick = 0;
  double t_send = 0.0;
  double t = 0.0;
  double z_before = 0.0;  // z(t_c)
  double z_after = 0.0;   // z(t_c+)
};

/// A periodic-schedule instant at which the sensor evaluated the trigger rule.
struct CandidateEvent {
  std::uint64_t k = 0;
  Tick tick = 0;
  double t = 0.0;
  double z = 0.0;
  bool fired = false;
};

enum class RunStatus {
  completed,
  diverged,          // |x| exceeded the divergence threshold or became non-finite
  invariant_breach,  // an analysis-guaranteed invariant failed; run aborted
};

std::string_view to_string(RunStatus status);

struct SimTrace {
  std::string scenario_name;
  SchemeKind scheme = SchemeKind::linear;
  std::uint64_t seed = 0;
  SchemeBounds bounds;
  std::vector<StepRecord> steps;
  std::vector<SendEvent> sends;
  std::vector<ReceptionEvent> receptions;
  std::vector<CandidateEvent> candidates;
  RunStatus status = RunStatus::completed;
  std::string diagnostics;
  /// Largest |z| seen, tracked even when steps are not recorded.
  double max_abs_z = 0.0;

  [[nodiscard]] bool ok() const noexcept { return status == RunStatus::completed; }
};

}  // namespace etcsim
