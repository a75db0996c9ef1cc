#include "formation/oracle.hpp"

#include <cmath>

#include <fmt/format.h>

#include "formation/sampling.hpp"

namespace formation {

AscentTrace ascend(ConstraintSets sets, const Layout& layout, const SmoothingParams& params,
                   const Vector& start, const Tolerances& tol) {
  AscentTrace trace;
  trace.x = start;
  trace.beta = smooth_beta(sets, trace.x, layout, params);
  trace.beta_history.push_back(trace.beta);
  if (!std::isfinite(trace.beta)) return trace;

  for (int it = 0; it < tol.ascent_max_iterations; ++it) {
    const Vector g = grad_smooth_beta(sets, trace.x, layout, params);
    if (!g.allFinite()) {
      trace.beta = std::numeric_limits<double>::quiet_NaN();
      return trace;
    }
    const double g2 = g.squaredNorm();
    if (std::sqrt(g2) < tol.ascent_gradient_tol) {
      trace.converged = true;
      break;
    }
    double step = tol.initial_step;
    bool accepted = false;
    for (int b = 0; b < tol.ascent_max_backtracks; ++b) {
      const Vector candidate = trace.x + step * g;
      const double value = smooth_beta(sets, candidate, layout, params);
      if (std::isfinite(value) && value >= trace.beta + tol.armijo * step * g2) {
        trace.x = candidate;
        trace.beta = value;
        trace.beta_history.push_back(value);
        accepted = true;
        break;
      }
      step *= tol.backtrack_shrink;
    }
    trace.iterations = it + 1;
    if (!accepted) {
      // No representable improvement left along the gradient.
      trace.converged = true;
      break;
    }
  }
  return trace;
}

OracleResult centralized_maximize(const Problem& problem, const SmoothingParams& params,
                                  int restarts, std::uint64_t seed, const Tolerances& tol) {
  params.validate();
  if (restarts < 1) throw ConfigError("need at least one restart");
  const auto& layout = problem.layout;
  const Box box = effective_init_box(problem.scenario);

  OracleResult result;
  Sampler seeds(seed);
  for (int r = 0; r < restarts; ++r) {
    Sampler rng(seeds.next());
    Vector start(layout.size());
    for (int i = 0; i < layout.agents; ++i) start.segment(i * layout.dim, layout.dim) = rng.in_box(box);

    AscentTrace trace = ascend(problem.sets, layout, params, start, tol);
    if (!std::isfinite(trace.beta) || !trace.x.allFinite()) {
      result.diagnostics.push_back(fmt::format("restart {}: objective became non-finite; discarded", r));
      trace.x = Vector();
    } else {
      ++result.successful_restarts;
      if (result.best_restart < 0 || trace.beta > result.beta) {
        result.best_restart = r;
        result.beta = trace.beta;
        result.x = trace.x;
      }
    }
    result.restarts.push_back(std::move(trace));
  }
  if (result.successful_restarts == 0) {
    throw OracleError(fmt::format("all {} restarts failed", restarts));
  }
  result.beta_bar = global_beta_bar(problem.sets, result.x, layout);

  std::vector<Vector> representatives;
  for (const auto& trace : result.restarts) {
    if (trace.x.size() == 0) continue;
    bool known = false;
    for (const auto& rep : representatives) {
      if ((rep - trace.x).lpNorm<Eigen::Infinity>() <= tol.optimum_cluster_tol) {
        known = true;
        break;
      }
    }
    if (!known) representatives.push_back(trace.x);
  }
  result.distinct_optima = static_cast<int>(representatives.size());
  return result;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Feasible:
      return "Feasible";
    case Verdict::TightlyFeasible:
      return "TightlyFeasible";
    case Verdict::Infeasible:
      return "Infeasible";
  }
  return "?";
}

Verdict feasibility_verdict(double beta_bar, double margin) {
  if (beta_bar > margin) return Verdict::Feasible;
  if (beta_bar > 0.0) return Verdict::TightlyFeasible;
  return Verdict::Infeasible;
}

Verdict feasibility_verdict(const Problem& problem, const Vector& x, double margin) {
  return feasibility_verdict(global_beta_bar(problem.sets, x, problem.layout), margin);
}

}  // namespace formation
