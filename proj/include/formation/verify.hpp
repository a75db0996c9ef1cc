#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "formation/config.hpp"
#include "formation/sampling.hpp"
#include "formation/scenario.hpp"

namespace formation {

// Property suites behind `formation verify`. Each property reports its worst
// margin (>= 0 means satisfied) and the seed that reproduces it.

struct PropertyResult {
  std::string name;
  bool passed = true;
  bool skipped = false;
  double worst_margin = 0.0;
  std::uint64_t seed = 0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<PropertyResult> results;

  bool passed() const;
};

struct VerifyOptions {
  std::vector<std::string> cases;  // empty: suite default
  std::uint64_t seed = 1;
  int samples = 1000;
  int oracle_restarts = 100;
  Tolerances tol = kDefaultTolerances;
};

struct RandomScenarioOptions {
  int min_agents = 2;
  int max_agents = 4;
  int min_dim = 1;
  int max_dim = 3;
  int max_atoms_per_agent = 3;
  bool allow_outside = true;
  // Every agent gets at least one Inside atom with a fixed anchor.
  bool fixed_inside_per_agent = false;
  double coordinate_range = 3.0;
};

// Random quadratic scenario with a complete communication graph, so every
// dependency cluster is connected. May have several clusters.
Scenario random_scenario(Sampler& rng, const RandomScenarioOptions& options = {});

SuiteReport verify_bounds(const VerifyOptions& options);
SuiteReport verify_gradients(const VerifyOptions& options);
SuiteReport verify_convexity(const VerifyOptions& options);
SuiteReport verify_conservation(const VerifyOptions& options);
SuiteReport verify_oracle(const VerifyOptions& options);

// "bounds", "gradients", "convexity", "conservation", "oracle" or "all".
std::vector<SuiteReport> run_suite(const std::string& name, const VerifyOptions& options);
const std::vector<std::string>& suite_names();

std::string format_report(const SuiteReport& report);

// Relative error between an analytic and a finite-difference gradient. The
// denominator is floored at 1e-3 |phi| so that rounding noise in the
// difference quotient is not amplified near stationary points.
double gradient_relative_error(const Vector& analytic, const Vector& numeric, double value);

// Central differences of `f` at x with step h.
template <typename F>
Vector central_difference(F&& f, const Vector& x, double h) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = f(probe);
    probe[k] = x[k] - h;
    const double down = f(probe);
    probe[k] = x[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace formation
