// formation: run constraint-satisfaction scenarios and property checks.
//
// Exit codes
//   0  success
//   1  invalid flags, or a verify property failed
//   2  scenario could not be loaded or failed validation
//   3  integration failure (non-finite state or saturated objective)

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "formation/errors.hpp"
#include "formation/optimizer.hpp"
#include "formation/report.hpp"
#include "formation/scenario.hpp"
#include "formation/verify.hpp"

namespace fs = std::filesystem;
using namespace formation;

namespace {

enum Exit { kOk = 0, kBadFlags = 1, kBadScenario = 2, kIntegration = 3 };

struct Source {
  std::string scenario_path;
  std::string case_name;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* path = cmd->add_option("--scenario", src.scenario_path, "scenario JSON file");
  auto* name = cmd->add_option("--case", src.case_name, "built-in case (A..E, Example1)")
                   ->check(CLI::IsMember(builtin_case_names()));
  path->excludes(name);
  name->excludes(path);
  cmd->callback([path, name] {
    if (path->count() + name->count() == 0) throw CLI::RequiredError("--scenario or --case");
  });
}

Scenario load(const Source& src) {
  if (!src.scenario_path.empty()) return load_scenario(src.scenario_path);
  return builtin_case(src.case_name);
}

void print_issues(const ScenarioError& e) {
  fmt::print(std::cerr, "scenario error:\n");
  for (const auto& issue : e.issues()) {
    fmt::print(std::cerr, "  {}: {}\n", issue.path.empty() ? "(document)" : issue.path, issue.message);
  }
}

struct RunFlags {
  Source source;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<double> dt, horizon, sample_every, nu_alpha, nu_beta_nominal;
  bool split_clusters = false;
  bool quiet = false;
};

int cmd_run(const RunFlags& f) {
  std::optional<Problem> compiled;
  try {
    Scenario s = load(f.source);
    if (f.dt) s.integration.dt = *f.dt;
    if (f.horizon) s.integration.horizon = *f.horizon;
    if (f.sample_every) s.integration.sample_every = *f.sample_every;
    if (f.nu_alpha) s.gains.nu_alpha = *f.nu_alpha;
    if (f.nu_beta_nominal) s.gains.nu_beta.nominal = *f.nu_beta_nominal;
    compiled = compile(s, f.split_clusters);
  } catch (const ScenarioError& e) {
    print_issues(e);
    return kBadScenario;
  } catch (const ConfigError& e) {
    fmt::print(std::cerr, "scenario error: {}\n", e.what());
    return kBadScenario;
  }
  const Problem& problem = *compiled;

  const std::uint64_t seed = f.seed.value_or(problem.scenario.seed);
  RunOptions options;
  if (!f.quiet) {
    const double every = std::max(10.0, problem.scenario.integration.sample_every);
    double next = 0.0;
    options.on_sample = [&next, every](double t, double beta_bar, double err) {
      if (t + 1e-9 < next) return;
      next += every;
      fmt::print(std::cerr, "t={:8.2f}  beta_bar={:+.5f}  consensus_err={:.3e}\n", t, beta_bar, err);
    };
  }

  TrajectoryRecord record;
  try {
    record = problem.clusters.clusters.size() > 1 ? run_clusters(problem, seed, options)
                                                  : run(problem, seed, options);
  } catch (const IntegrationError& e) {
    fmt::print(std::cerr, "{}\n", e.what());
    return kIntegration;
  }

  std::error_code ec;
  fs::create_directories(f.out, ec);
  const fs::path csv_path = fs::path(f.out) / "trajectory.csv";
  const fs::path summary_path = fs::path(f.out) / "summary.txt";
  std::ofstream csv(csv_path, std::ios::binary);
  std::ofstream summary(summary_path, std::ios::binary);
  if (!csv || !summary) {
    fmt::print(std::cerr, "cannot write to output directory '{}'\n", f.out);
    return kBadFlags;
  }
  write_trajectory_csv(csv, record);
  const RunSummary s = summarize(problem, seed, record);
  write_summary(summary, s);
  if (!f.quiet) write_summary(std::cerr, s);
  return kOk;
}

struct VerifyFlags {
  std::string suite = "all";
  std::vector<std::string> cases;
  std::uint64_t seed = 1;
  int samples = 1000;
  int restarts = 100;
};

int cmd_verify(const VerifyFlags& f) {
  VerifyOptions options;
  options.cases = f.cases;
  options.seed = f.seed;
  options.samples = f.samples;
  options.oracle_restarts = f.restarts;
  bool ok = true;
  for (const auto& report : run_suite(f.suite, options)) {
    fmt::print("{}", format_report(report));
    ok = ok && report.passed();
  }
  fmt::print("{}\n", ok ? "all properties passed" : "some properties FAILED");
  return ok ? kOk : kBadFlags;
}

struct GraphFlags {
  Source source;
  std::string kind = "task";
};

int cmd_graph(const GraphFlags& f) {
  const Problem problem = compile(load(f.source), true);
  if (f.kind == "task") {
    fmt::print("{}", to_dot(problem.task_graph));
  } else if (f.kind == "comm") {
    fmt::print("{}", to_dot(problem.comm_graph));
  } else {
    const auto& L = problem.laplacian;
    for (Eigen::Index r = 0; r < L.rows(); ++r) {
      for (Eigen::Index c = 0; c < L.cols(); ++c) fmt::print("{}{:3d}", c ? " " : "", L(r, c));
      fmt::print("\n");
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed constraint-satisfaction formation simulator"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario and write trajectory.csv and summary.txt");
  add_source(run_cmd, run_flags.source);
  run_cmd->add_option("--seed", run_flags.seed, "initialization seed (default: scenario seed)");
  run_cmd->add_option("--out", run_flags.out, "output directory")->capture_default_str();
  run_cmd->add_option("--dt", run_flags.dt, "RK4 step")->check(CLI::PositiveNumber);
  run_cmd->add_option("--horizon", run_flags.horizon, "final time")->check(CLI::PositiveNumber);
  run_cmd->add_option("--sample-every", run_flags.sample_every, "sampling interval")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--nu-alpha", run_flags.nu_alpha, "inner smoothing parameter")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--nu-beta-nominal", run_flags.nu_beta_nominal, "cap of the nu_beta ramp")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--split-clusters", run_flags.split_clusters,
                    "run each dependency cluster separately");
  run_cmd->add_flag("-q,--quiet", run_flags.quiet, "no progress on stderr");

  VerifyFlags verify_flags;
  auto* verify_cmd = app.add_subcommand("verify", "run property suites");
  verify_cmd->add_option("--suite", verify_flags.suite)
      ->check(CLI::IsMember(suite_names()))
      ->capture_default_str();
  verify_cmd->add_option("--case", verify_flags.cases, "built-in case(s); default per suite")
      ->check(CLI::IsMember(builtin_case_names()));
  verify_cmd->add_option("--seed", verify_flags.seed)->capture_default_str();
  verify_cmd->add_option("--samples", verify_flags.samples)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  verify_cmd->add_option("--restarts", verify_flags.restarts, "oracle restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  GraphFlags graph_flags;
  auto* graph_cmd = app.add_subcommand("graph", "print the task or communication graph (DOT) or the Laplacian");
  add_source(graph_cmd, graph_flags.source);
  graph_cmd->add_option("--kind", graph_flags.kind)
      ->check(CLI::IsMember({"task", "comm", "laplacian"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadFlags;
  }

  try {
    if (*run_cmd) return cmd_run(run_flags);
    if (*verify_cmd) return cmd_verify(verify_flags);
    if (*graph_cmd) return cmd_graph(graph_flags);
  } catch (const ScenarioError& e) {
    print_issues(e);
    return kBadScenario;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kBadFlags;
  }
  return kBadFlags;
}
