#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "etcsim/engine.hpp"
#include "etcsim/metrics.hpp"
#include "etcsim/scenario.hpp"
#include "etcsim/trace.hpp"

namespace etcsim {

/// Scenario <-> JSON. Keys carry their units (gamma_s, delta_s, ...).
/// Throws ConfigError on missing or malformed keys.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical text of a scenario file (two-space indent, trailing newline).
std::string scenario_text(const Scenario& s);

struct BuiltinScenario {
  std::string name;
  std::string description;
  std::vector<Scenario> runs;  // one per figure column
};

/// paper/linear-gamma2delta, paper/linear-gamma5delta, paper/nonlinear-fig,
/// paper/nonlinear-rate.
const std::vector<BuiltinScenario>& builtin_scenarios();
/// Throws ConfigError listing the built-in names when `name` is unknown.
const BuiltinScenario& find_builtin(std::string_view name);
/// Parameter table for `list`.
std::string describe_builtins();

/// Per-step trace CSV. Linear: t,x1,x2,xhat1,xhat2,z1,u,w1,w2,phi,phidot.
/// Nonlinear: t,x,xhat,z,u,w.
void write_trace_csv(std::ostream& os, const SimTrace& trace);
/// Events CSV: kind,seq,t,t_send,g_bits,payload,z_before,z_after.
/// kind is send, reception or candidate (nonlinear schedule instants).
void write_events_csv(std::ostream& os, const SimTrace& trace);
/// Sweep CSV: gamma,g_bits,R_s,entropy_ref,max_z,violations.
void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points);

nlohmann::json summary_json(const ResolvedScenario& rs, const SimTrace& trace);

/// Writes `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// "start:stop:count"
std::vector<double> parse_grid(std::string_view spec);

}  // namespace etcsim
