#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = WORK_DIR;

// Runs the CLI, capturing stdout and stderr into `log`.
int cli(const std::string& args, const std::string& log = "last.log") {
  fs::create_directories(kWork);
  const std::string command = std::string(FORMATION_CLI) + " " + args + " > " +
                              (kWork / log).string() + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string out_dir(const std::string& name) { return (kWork / name).string(); }

}  // namespace

TEST_CASE("run writes trajectory and summary") {
  const std::string dir = out_dir("a");
  REQUIRE(cli("run --case A --seed 7 --horizon 60 --out " + dir + " -q") == 0);
  const std::string csv = slurp(fs::path(dir) / "trajectory.csv");
  CHECK(csv.rfind("t,x1_1,x1_2,x2_1,x2_2,x3_1,x3_2,beta_bar,beta,consensus_err,nu_beta\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  const std::string summary = slurp(fs::path(dir) / "summary.txt");
  CHECK(summary.find("verdict: Feasible") != std::string::npos);
  CHECK(summary.find("satisfaction_time:") != std::string::npos);
}

TEST_CASE("run from a scenario file") {
  const std::string dir = out_dir("file");
  REQUIRE(cli("run --scenario " SCENARIO_DIR "/case_b.json --horizon 10 --out " + dir + " -q") == 0);
  CHECK(slurp(fs::path(dir) / "summary.txt").find("scenario: B") != std::string::npos);
}

TEST_CASE("identical flags give byte-identical CSV") {
  REQUIRE(cli("run --case E --seed 3 --horizon 30 --out " + out_dir("e1") + " -q") == 0);
  REQUIRE(cli("run --case E --seed 3 --horizon 30 --out " + out_dir("e2") + " -q") == 0);
  CHECK(slurp(fs::path(out_dir("e1")) / "trajectory.csv") ==
        slurp(fs::path(out_dir("e2")) / "trajectory.csv"));
}

TEST_CASE("exit 1 on invalid flags") {
  CHECK(cli("run --case A --seed notanumber") == 1);
  CHECK(cli("run --case Q") == 1);
  CHECK(cli("run") == 1);
  CHECK(cli("run --case A --scenario x.json") == 1);
  CHECK(cli("run --case A --dt -1") == 1);
  CHECK(cli("frobnicate") == 1);
  CHECK(cli("verify --suite everything") == 1);
}

TEST_CASE("exit 2 on scenario errors") {
  CHECK(cli("run --scenario missing.json", "missing.log") == 2);
  CHECK(slurp(kWork / "missing.log").find("missing.json") != std::string::npos);

  const fs::path bad = kWork / "bad.json";
  std::ofstream(bad) << R"({"format_version": 1, "agents": {"count": 1, "dimension": 2},
    "constraints": [{"owner": 1, "sense": "inside", "radius": -1, "anchor": {"point": [0, 0]}}]})";
  CHECK(cli("run --scenario " + bad.string(), "bad.log") == 2);
  CHECK(slurp(kWork / "bad.log").find("constraints[0].radius") != std::string::npos);

  // sample interval not a multiple of dt
  CHECK(cli("run --case A --dt 0.03 --sample-every 0.1") == 2);
}

TEST_CASE("exit 3 on integration failure") {
  // Case D blows up under RK4 at this step size once nu_beta is large.
  CHECK(cli("run --case D --dt 0.05 --sample-every 0.1 --nu-beta-nominal 50 --out " + out_dir("d") + " -q",
            "diverge.log") == 3);
  CHECK(slurp(kWork / "diverge.log").find("agent") != std::string::npos);
}

TEST_CASE("verify exit codes") {
  CHECK(cli("verify --suite bounds --samples 100", "bounds.log") == 0);
  CHECK(slurp(kWork / "bounds.log").find("[PASS]") != std::string::npos);
  CHECK(cli("verify --suite convexity --case E", "convexity_e.log") == 0);
  CHECK(slurp(kWork / "convexity_e.log").find("hypotheses not met") != std::string::npos);
}

TEST_CASE("graph export") {
  CHECK(cli("graph --case Example1 --kind task", "task.dot") == 0);
  CHECK(slurp(kWork / "task.dot").find("digraph") != std::string::npos);
  CHECK(cli("graph --case A --kind laplacian", "lap.txt") == 0);
  CHECK(slurp(kWork / "lap.txt") == "  1  -1   0\n -1   2  -1\n  0  -1   1\n");
}
