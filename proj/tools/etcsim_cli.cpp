// etcsim: run scenarios, sweep gamma, print built-ins, validate invariants.
//
// Exit codes: 0 success, 1 infeasible or malformed configuration,
// 2 a run diverged or breached an invariant (or `validate` found a violation).

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etcsim/engine.hpp"
#include "etcsim/errors.hpp"
#include "etcsim/io.hpp"
#include "etcsim/metrics.hpp"
#include "etcsim/validation.hpp"

namespace fs = std::filesystem;
using namespace etcsim;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRun = 2;

fs::path default_out_dir() {
  if (const char* env = std::getenv("ETCSIM_OUT_DIR"); env && *env) return env;
  return "out";
}

/// A path to a scenario file, or the name of a built-in.
std::vector<Scenario> scenarios_for(const std::string& ref) {
  if (fs::exists(ref)) return {load_scenario(ref)};
  return find_builtin(ref).runs;
}

std::string slug(const std::string& name) { return name.empty() ? "scenario" : name; }

std::string csv_of(void (*writer)(std::ostream&, const SimTrace&), const SimTrace& trace) {
  std::ostringstream os;
  writer(os, trace);
  return os.str();
}

int cmd_run(const std::string& ref, const fs::path& out, std::optional<std::uint64_t> seed, bool write_trace) {
  int status = 0;
  for (Scenario s : scenarios_for(ref)) {
    if (seed) s.seed = *seed;
    const ResolvedScenario rs = resolve(s);
    for (const auto& w : rs.warnings) std::cerr << "warning: " << w << "\n";
    const SimTrace trace = run(rs);
    const fs::path dir = out / slug(s.name);
    if (write_trace) write_file_atomic(dir / "trace.csv", csv_of(write_trace_csv, trace));
    write_file_atomic(dir / "events.csv", csv_of(write_events_csv, trace));
    const auto summary = summary_json(rs, trace);
    write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");

    const auto rate = compute_rate(trace);
    std::cout << s.name << ": " << to_string(trace.status) << ", g=" << rs.bounds.bits << " bits, J=" << rs.bounds.J
              << ", sends=" << trace.sends.size() << ", R_s=";
    if (rate.R_s) {
      std::cout << *rate.R_s << " bits/s";
    } else {
      std::cout << "n/a";
    }
    std::cout << ", envelope violations=" << rate.violation_count << " -> " << dir.string() << "\n";
    if (!trace.ok()) {
      std::cerr << "error: " << trace.diagnostics << "\n";
      status = kExitRun;
    }
  }
  return status;
}

int cmd_sweep(const std::string& ref, const std::string& grid, const fs::path& out, std::vector<std::uint64_t> seeds,
              unsigned threads) {
  const auto runs = scenarios_for(ref);
  const Scenario& base = runs.front();
  if (seeds.empty()) seeds = {base.seed};
  const auto gammas = parse_grid(grid);
  const auto points = sweep(base, gammas, seeds, threads);

  std::size_t failed = 0, feasible = 0;
  nlohmann::json report = nlohmann::json::array();
  for (const auto& p : points) {
    nlohmann::json j{{"gamma_requested", p.gamma_requested}, {"feasible", p.feasible}};
    if (p.feasible) {
      ++feasible;
      failed += p.failed_runs;
      j["gamma_s"] = p.gamma;
      j["g_bits"] = p.bits;
      j["J"] = p.J;
      j["runs"] = p.runs;
      j["R_s"] = p.rate.R_s ? nlohmann::json(*p.rate.R_s) : nlohmann::json(nullptr);
      j["entropy_ref"] = p.entropy_reference;
      j["max_z"] = p.max_abs_z;
      j["violations"] = p.violations;
      j["failed_runs"] = p.failed_runs;
      j["warnings"] = p.warnings;
      for (const auto& w : p.warnings) std::cerr << "warning: " << w << "\n";
    } else {
      j["skip_reason"] = p.skip_reason;
      std::cerr << "warning: skipping gamma=" << p.gamma_requested << ": " << p.skip_reason << "\n";
    }
    report.push_back(j);
  }
  const fs::path dir = out / slug(base.name);
  std::ostringstream csv;
  write_sweep_csv(csv, points);
  write_file_atomic(dir / "sweep.csv", csv.str());
  write_file_atomic(dir / "sweep.json", report.dump(2) + "\n");
  std::cout << csv.str();
  std::cout << feasible << " of " << points.size() << " grid points feasible, " << seeds.size()
            << " seeds each -> " << (dir / "sweep.csv").string() << "\n";
  if (feasible == 0) return kExitConfig;
  return failed > 0 ? kExitRun : 0;
}

int cmd_paper_scenario(const std::string& name, bool list, const std::optional<fs::path>& write_dir) {
  if (list || name.empty()) {
    std::cout << describe_builtins();
    return 0;
  }
  const auto& b = find_builtin(name);
  for (const auto& s : b.runs) {
    if (write_dir) {
      const fs::path path = *write_dir / (s.name + ".json");
      write_file_atomic(path, scenario_text(s));
      std::cout << path.string() << "\n";
    } else {
      std::cout << scenario_text(s);
    }
  }
  return 0;
}

int cmd_validate(std::size_t runs, unsigned threads) {
  const auto checks = run_validation(ValidationOptions{runs, threads});
  std::size_t failed = 0;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    if (!c.passed) ++failed;
  }
  std::cout << (checks.size() - failed) << "/" << checks.size() << " checks passed\n";
  return failed == 0 ? 0 : kExitRun;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-triggered control over a delayed digital channel"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool no_trace = false;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario file or built-in and write trace, events and summary");
  run_cmd->add_option("-s,--scenario", scenario, "Scenario file path or built-in name")->required();
  run_cmd->add_option("-o,--out", out_dir, "Output directory (default: $ETCSIM_OUT_DIR or ./out)");
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_flag("--no-trace", no_trace, "Skip the per-step trace CSV");

  std::string grid;
  std::vector<std::uint64_t> seeds;
  unsigned threads = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep gamma over a grid and write the rate CSV");
  sweep_cmd->add_option("-s,--scenario", scenario, "Scenario file path or built-in name")->required();
  sweep_cmd->add_option("--gammas", grid, "Grid start:stop:count (s)")->required();
  sweep_cmd->add_option("--seeds", seeds, "Seeds pooled at each grid point")->delimiter(',');
  sweep_cmd->add_option("-o,--out", out_dir, "Output directory (default: $ETCSIM_OUT_DIR or ./out)");
  sweep_cmd->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");

  std::string builtin;
  bool list = false;
  std::optional<fs::path> write_dir;
  auto* paper_cmd = app.add_subcommand("paper-scenario", "Print or write the built-in scenarios");
  paper_cmd->add_option("name", builtin, "Built-in name");
  paper_cmd->add_flag("-l,--list", list, "List built-ins with their parameters");
  paper_cmd->add_option("-w,--write", write_dir, "Write the scenario files under this directory");
  auto* list_cmd = app.add_subcommand("list", "List built-in scenarios");

  std::size_t runs = 200;
  auto* validate_cmd = app.add_subcommand("validate", "Run the invariant suite; nonzero exit on any violation");
  validate_cmd->add_option("--runs", runs, "Seeded runs per built-in scenario")->check(CLI::PositiveNumber);
  validate_cmd->add_option("-j,--threads", threads, "Worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  const fs::path out = out_dir.empty() ? default_out_dir() : fs::path(out_dir);
  try {
    if (*run_cmd) return cmd_run(scenario, out, seed, !no_trace);
    if (*sweep_cmd) return cmd_sweep(scenario, grid, out, seeds, threads);
    if (*paper_cmd) return cmd_paper_scenario(builtin, list, write_dir);
    if (*list_cmd) return cmd_paper_scenario("", true, std::nullopt);
    if (*validate_cmd) return cmd_validate(runs, threads);
  } catch (const ConfigError& e) {
    std::cerr << "infeasible configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return kExitRun;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
