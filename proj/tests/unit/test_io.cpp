#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "etcsim/engine.hpp"
#include "etcsim/errors.hpp"
#include "etcsim/io.hpp"

using namespace etcsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST_CASE("built-ins are the four paper scenarios") {
  const auto& b = builtin_scenarios();
  REQUIRE(b.size() == 4);
  CHECK(b[0].name == "paper/linear-gamma2delta");
  CHECK(b[1].name == "paper/linear-gamma5delta");
  CHECK(b[2].name == "paper/nonlinear-fig");
  CHECK(b[3].name == "paper/nonlinear-rate");
  CHECK(b[2].runs.size() == 2);
}

TEST_CASE("built-ins carry the reported parameters") {
  const auto& g5 = find_builtin("paper/linear-gamma5delta").runs.front();
  CHECK(g5.channel.gamma == 0.015);
  CHECK(g5.channel.delta == 0.003);
  CHECK(std::get<LinearSetup>(g5.setup).declared_bits == 7);

  const auto& fig = find_builtin("paper/nonlinear-fig").runs;
  const auto& col1 = std::get<NonlinearSetup>(fig[0].setup);
  CHECK(fig[0].channel.gamma == 0.1);
  CHECK(col1.plant.M() == 0.1);
  CHECK(col1.declared_bits == 3);
  CHECK(resolve(fig[0]).bounds.bits == 3);
  CHECK(std::get<NonlinearSetup>(fig[1].setup).declared_bits == 15);
  CHECK(resolve(fig[1]).bounds.bits == 15);

  const auto& rate = find_builtin("paper/nonlinear-rate").runs.front();
  const auto& setup = std::get<NonlinearSetup>(rate.setup);
  CHECK(rate.channel.delta == 0.01);
  CHECK(rate.horizon == 100.0);
  CHECK(setup.gain == 2.0);
  CHECK(setup.x0 - setup.xhat0 == doctest::Approx(0.01));
}

TEST_CASE("unknown built-in names list the alternatives") {
  try {
    (void)find_builtin("paper/nope");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    for (const auto& b : builtin_scenarios()) CHECK(msg.find(b.name) != std::string::npos);
  }
}

TEST_CASE("every built-in round-trips through JSON unchanged") {
  for (const auto& b : builtin_scenarios()) {
    for (const auto& s : b.runs) {
      CAPTURE(s.name);
      const auto text = scenario_text(s);
      const auto again = scenario_from_json(nlohmann::json::parse(text));
      CHECK(scenario_text(again) == text);
    }
  }
}

TEST_CASE("shipped scenario files match the built-ins") {
  const fs::path dir = fs::path(ETCSIM_SOURCE_DIR) / "scenarios";
  for (const auto& b : builtin_scenarios()) {
    for (const auto& s : b.runs) {
      const fs::path file = dir / (s.name + ".json");
      CAPTURE(file.string());
      REQUIRE(fs::exists(file));
      CHECK(slurp(file) == scenario_text(s));
      CHECK(scenario_text(load_scenario(file)) == scenario_text(s));
    }
  }
}

TEST_CASE("physical pendulum parameters round-trip") {
  auto s = find_builtin("paper/linear-gamma2delta").runs.front();
  auto& setup = std::get<LinearSetup>(s.setup);
  setup.physical = PendulumParams::prototype();
  setup.pendulum = linearize(*setup.physical);
  setup.initial_estimate = Vec2(0.01, -0.02);
  setup.bits = 5;
  const auto text = scenario_text(s);
  CHECK(text.find("\"m1_kg\"") != std::string::npos);
  CHECK(scenario_text(scenario_from_json(nlohmann::json::parse(text))) == text);
}

TEST_CASE("malformed scenarios are rejected") {
  auto j = scenario_to_json(find_builtin("paper/nonlinear-fig").runs.front());
  auto missing = j;
  missing["channel"].erase("gamma_s");
  CHECK_THROWS_AS(scenario_from_json(missing), ConfigError);

  auto wrong_type = j;
  wrong_type["horizon_s"] = "twenty";
  CHECK_THROWS_AS(scenario_from_json(wrong_type), ConfigError);

  auto bad_scheme = j;
  bad_scheme["scheme"] = "hybrid";
  CHECK_THROWS_AS(scenario_from_json(bad_scheme), ConfigError);

  auto no_threshold = j;
  no_threshold["nonlinear"].erase("J_margin");
  CHECK_THROWS_AS(scenario_from_json(no_threshold), ConfigError);

  CHECK_THROWS_AS(scenario_from_json(nlohmann::json::array()), ConfigError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), ConfigError);
}

TEST_CASE("explicit thresholds override the margin recipe") {
  auto j = scenario_to_json(find_builtin("paper/nonlinear-fig").runs.front());
  j["nonlinear"].erase("J_margin");
  j["nonlinear"]["J"] = 0.03;
  CHECK(resolve(scenario_from_json(j)).bounds.J == 0.03);
}

TEST_CASE("grid syntax") {
  const auto g = parse_grid("0.02:0.99:20");
  REQUIRE(g.size() == 20);
  CHECK(g.front() == 0.02);
  CHECK(g.back() == 0.99);
  CHECK(parse_grid("0.1") == std::vector<double>{0.1});
  CHECK_THROWS_AS(parse_grid("0.1:0.2"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0.1:0.2:x"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0.1:0.2:2.5"), ConfigError);
  CHECK_THROWS_AS(parse_grid("0.1:0.2:0"), ConfigError);
}

TEST_CASE("CSV headers") {
  const auto lin = run(find_builtin("paper/linear-gamma2delta").runs.front());
  const auto nl = run(find_builtin("paper/nonlinear-fig").runs.front());
  std::ostringstream a, b, c, d, e;
  write_trace_csv(a, lin);
  write_trace_csv(b, nl);
  write_events_csv(c, nl);
  write_sweep_csv(d, {});
  CHECK(first_line(a.str()) == "t,x1,x2,xhat1,xhat2,z1,u,w1,w2,phi,phidot");
  CHECK(first_line(b.str()) == "t,x,xhat,z,u,w");
  CHECK(first_line(c.str()) == "kind,seq,t,t_send,g_bits,payload,z_before,z_after");
  CHECK(d.str() == "gamma,g_bits,R_s,entropy_ref,max_z,violations\n");
  // One row per recorded step plus the header.
  const auto trace_csv = b.str();
  CHECK(std::count(trace_csv.begin(), trace_csv.end(), '\n') == static_cast<long>(nl.steps.size() + 1));
  const auto events = c.str();
  CHECK(std::count(events.begin(), events.end(), '\n') ==
        static_cast<long>(1 + nl.sends.size() + nl.receptions.size() + nl.candidates.size()));
}

TEST_CASE("numbers in CSVs round-trip exactly") {
  const auto nl = run(find_builtin("paper/nonlinear-fig").runs.front());
  std::ostringstream os;
  write_trace_csv(os, nl);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::getline(in, line);  // second step
  const auto first_comma = line.find(',');
  const double x = std::stod(line.substr(first_comma + 1, line.find(',', first_comma + 1) - first_comma - 1));
  CHECK(x == nl.steps[1].x1);
}

TEST_CASE("summary JSON carries bounds, rate and envelope checks") {
  const auto rs = resolve(find_builtin("paper/nonlinear-fig").runs.front());
  const auto trace = run(rs);
  const auto j = summary_json(rs, trace);
  CHECK(j["g_bits"] == 3);
  CHECK(j["status"] == "completed");
  CHECK(j["packet_size"]["bits"] == 3);
  CHECK(j["entropy_reference_bits_per_s"] == 1.0);
  CHECK(j["envelopes"].size() == 4);
  CHECK(j["rate"]["trigger_count"] == trace.sends.size());
}

TEST_CASE("atomic writes create directories and replace content") {
  const fs::path dir = fs::temp_directory_path() / "etcsim-io-test";
  fs::remove_all(dir);
  const fs::path file = dir / "nested" / "out.txt";
  write_file_atomic(file, "first");
  write_file_atomic(file, "second");
  CHECK(slurp(file) == "second");
  CHECK_FALSE(fs::exists(fs::path(file.string() + ".tmp")));
  fs::remove_all(dir);
}
