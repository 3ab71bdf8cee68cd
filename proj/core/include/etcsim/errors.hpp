#pragma once

#include <stdexcept>
#include <string>

namespace etcsim {

/// A configuration that violates a feasibility inequality. The message names
/// the inequality that failed.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scheme tried to do something the channel protocol forbids (e.g. sending
/// while a packet is still in flight).
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A runtime invariant that the analysis guarantees was observed broken.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace etcsim
