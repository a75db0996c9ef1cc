#pragma once

namespace formation {

// Numerical tolerances shared by the library, the verification suites and
// the tests. Every threshold lives here so the acceptance gates and the
// runtime checks cannot drift apart.
struct Tolerances {
  // Largest log-value we are willing to exponentiate (ln(DBL_MAX) ~ 709.78).
  double overflow_log_threshold = 700.0;

  // Central finite differences.
  double fd_step = 1e-5;
  double fd_relative_error = 1e-6;

  // Sandwich inequalities must hold with at least this slack.
  double sandwich_slack = -1e-12;

  // Midpoint log-convexity: allowed violation and required strict margin.
  double convexity_slack = 1e-12;
  double strict_convexity_margin = 1e-9;

  // Norm bound on sum_i z_i over a run started at z = 0.
  double integral_conservation = 1e-9;

  // Early stop: consensus error and field norm both below these for
  // `early_stop_steps` consecutive steps, after nu_beta reached nominal.
  double early_stop_consensus = 1e-6;
  double early_stop_field = 1e-8;
  int early_stop_steps = 100;

  // Centralized ascent.
  double armijo = 1e-4;
  double backtrack_shrink = 0.5;
  double initial_step = 1.0;
  double ascent_gradient_tol = 1e-10;
  int ascent_max_iterations = 20000;
  int ascent_max_backtracks = 60;
  double optimum_cluster_tol = 1e-2;

  // Feasible iff beta_bar > margin; TightlyFeasible iff 0 < beta_bar <= margin.
  double feasibility_margin = 0.5;
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace formation
