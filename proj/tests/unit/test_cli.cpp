#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kOut = fs::temp_directory_path() / "etcsim-cli-test";

int etcsim(const std::string& args) {
  const std::string cmd = std::string(ETCSIM_CLI_PATH) + " " + args + " > " + (kOut / "stdout.txt").string() +
                          " 2> " + (kOut / "stderr.txt").string();
  fs::create_directories(kOut);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("run writes trace, events and summary") {
  fs::remove_all(kOut);
  REQUIRE(etcsim("run --scenario paper/linear-gamma2delta --out " + (kOut / "run").string()) == 0);
  const fs::path dir = kOut / "run" / "paper" / "linear-gamma2delta";
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "events.csv"));
  const auto summary = nlohmann::json::parse(read(dir / "summary.json"));
  CHECK(summary["g_bits"] == 4);
  CHECK(summary["status"] == "completed");
}

TEST_CASE("seed override changes the run and is recorded") {
  REQUIRE(etcsim("run -s paper/nonlinear-rate --seed 7 --no-trace -o " + (kOut / "seed").string()) == 0);
  const fs::path dir = kOut / "seed" / "paper" / "nonlinear-rate";
  CHECK_FALSE(fs::exists(dir / "trace.csv"));
  CHECK(nlohmann::json::parse(read(dir / "summary.json"))["seed"] == 7);
}

TEST_CASE("output directory defaults to the environment variable") {
  const fs::path env_out = kOut / "from-env";
  REQUIRE(etcsim("--help") == 0);
  const std::string cmd = "ETCSIM_OUT_DIR=" + env_out.string() + " " + ETCSIM_CLI_PATH +
                          " run -s paper/nonlinear-fig --no-trace > /dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(env_out / "paper" / "nonlinear-fig" / "gamma-0.1" / "summary.json"));
  CHECK(fs::exists(env_out / "paper" / "nonlinear-fig" / "gamma-0.99" / "summary.json"));
}

TEST_CASE("sweep writes the aggregated CSV") {
  REQUIRE(etcsim("sweep -s paper/nonlinear-rate --gammas 0.02:0.99:5 --seeds 1,2 -o " + (kOut / "sweep").string()) ==
          0);
  const auto csv = read(kOut / "sweep" / "paper" / "nonlinear-rate" / "sweep.csv");
  CHECK(csv.rfind("gamma,g_bits,R_s,entropy_ref,max_z,violations\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(fs::exists(kOut / "sweep" / "paper" / "nonlinear-rate" / "sweep.json"));
}

TEST_CASE("scenario files run like built-ins") {
  REQUIRE(etcsim("paper-scenario paper/nonlinear-fig --write " + (kOut / "files").string()) == 0);
  const fs::path file = kOut / "files" / "paper" / "nonlinear-fig" / "gamma-0.1.json";
  REQUIRE(fs::exists(file));
  CHECK(etcsim("run -s " + file.string() + " -o " + (kOut / "file-run").string()) == 0);
}

TEST_CASE("listing shows every built-in") {
  REQUIRE(etcsim("list") == 0);
  const auto out = read(kOut / "stdout.txt");
  for (const char* name : {"paper/linear-gamma2delta", "paper/linear-gamma5delta", "paper/nonlinear-fig",
                           "paper/nonlinear-rate"}) {
    CHECK(out.find(name) != std::string::npos);
  }
  REQUIRE(etcsim("paper-scenario --list") == 0);
  CHECK(read(kOut / "stdout.txt") == out);
}

TEST_CASE("unknown scenario exits 1 with the built-in names") {
  CHECK(etcsim("run -s paper/unknown -o " + kOut.string()) == 1);
  CHECK(read(kOut / "stderr.txt").find("paper/nonlinear-rate") != std::string::npos);
}

TEST_CASE("infeasible configuration exits 1 naming the inequality") {
  const fs::path file = kOut / "infeasible.json";
  auto j = nlohmann::json::parse(read(fs::path(ETCSIM_SOURCE_DIR) / "scenarios/paper/nonlinear-fig/gamma-0.1.json"));
  j["nonlinear"].erase("J_margin");
  j["nonlinear"]["J"] = 0.001;
  std::ofstream(file) << j.dump(2);
  CHECK(etcsim("run -s " + file.string() + " -o " + kOut.string()) == 1);
  CHECK(read(kOut / "stderr.txt").find("J >") != std::string::npos);
}

TEST_CASE("divergence exits 2") {
  const fs::path file = kOut / "diverge.json";
  auto j = nlohmann::json::parse(read(fs::path(ETCSIM_SOURCE_DIR) / "scenarios/paper/nonlinear-fig/gamma-0.1.json"));
  j["nonlinear"]["gain"] = 0.0;
  std::ofstream(file) << j.dump(2);
  CHECK(etcsim("run -s " + file.string() + " -o " + kOut.string()) == 2);
}

TEST_CASE("validate passes on the built-ins") {
  CHECK(etcsim("validate --runs 20") == 0);
  const auto out = read(kOut / "stdout.txt");
  CHECK(out.find("FAIL") == std::string::npos);
  CHECK(out.find("checks passed") != std::string::npos);
}
