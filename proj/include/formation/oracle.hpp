#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "formation/config.hpp"
#include "formation/constraints.hpp"
#include "formation/scenario.hpp"

namespace formation {

struct AscentTrace {
  Vector x;
  double beta = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> beta_history;  // one entry per accepted step, plus the start
};

struct OracleResult {
  Vector x;          // best maximizer of beta
  double beta = 0.0;
  double beta_bar = 0.0;
  int best_restart = -1;
  int successful_restarts = 0;
  // Restart end points grouped at tolerance optimum_cluster_tol (inf-norm).
  int distinct_optima = 0;
  std::vector<AscentTrace> restarts;  // index = restart number; failed ones have empty x
  std::vector<std::string> diagnostics;
};

// Steepest ascent on beta from `start` with Armijo backtracking.
AscentTrace ascend(ConstraintSets sets, const Layout& layout, const SmoothingParams& params,
                   const Vector& start, const Tolerances& tol = kDefaultTolerances);

// Multi-start centralized maximization of beta. Starting points are drawn
// from the scenario's sampling box. Restarts whose objective turns
// non-finite are dropped with a diagnostic; if all fail, throws OracleError.
// The best beta wins, ties going to the lower restart index.
OracleResult centralized_maximize(const Problem& problem, const SmoothingParams& params,
                                  int restarts, std::uint64_t seed,
                                  const Tolerances& tol = kDefaultTolerances);

enum class Verdict { Feasible, TightlyFeasible, Infeasible };

const char* to_string(Verdict v);

// Feasible iff beta_bar > margin, TightlyFeasible iff 0 < beta_bar <= margin,
// Infeasible otherwise.
Verdict feasibility_verdict(double beta_bar, double margin = kDefaultTolerances.feasibility_margin);
Verdict feasibility_verdict(const Problem& problem, const Vector& x,
                            double margin = kDefaultTolerances.feasibility_margin);

}  // namespace formation
