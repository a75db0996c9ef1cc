#include "formation/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "formation/constraints.hpp"
#include "formation/optimizer.hpp"
#include "formation/oracle.hpp"

namespace formation {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> cases_or(const VerifyOptions& o, std::vector<std::string> fallback) {
  return o.cases.empty() ? fallback : o.cases;
}

Vector random_point(Sampler& rng, const Box& box, int agents) {
  const int dim = static_cast<int>(box.lower.size());
  Vector x(agents * dim);
  for (int i = 0; i < agents; ++i) x.segment(i * dim, dim) = rng.in_box(box);
  return x;
}

Box cube(int dim, double half) {
  return {Vector::Constant(dim, -half), Vector::Constant(dim, half)};
}

// Tracks the worst margin of one property across samples.
struct Tracker {
  PropertyResult result;
  double threshold;

  Tracker(std::string name, double threshold_, std::uint64_t seed) : threshold(threshold_) {
    result.name = std::move(name);
    result.worst_margin = kInf;
    result.seed = seed;
  }

  void observe(double margin, const std::string& where) {
    if (margin < result.worst_margin) {
      result.worst_margin = margin;
      if (margin < threshold) result.detail = where;
    }
  }

  PropertyResult finish() {
    result.passed = result.worst_margin >= threshold;
    return result;
  }
};

bool all_inside(const Scenario& s) {
  return std::all_of(s.constraints.begin(), s.constraints.end(),
                     [](const ConstraintAtom& a) { return a.is_concave(); });
}

bool fixed_inside_per_agent(const std::vector<AgentConstraintSet>& sets) {
  return std::all_of(sets.begin(), sets.end(), [](const AgentConstraintSet& set) {
    return std::any_of(set.atoms().begin(), set.atoms().end(),
                       [](const ConstraintAtom& a) { return a.is_strictly_concave_in_owner(); });
  });
}

// Midpoint test on ln f for `pairs` random pairs. Returns (worst slack,
// smallest strict margin) where slack = 0.5 ln f(x) + 0.5 ln f(y) - ln f(mid).
// The worst slack is divided by max(1, |ln f(x)|, |ln f(y)|).
std::pair<double, double> midpoint_margins(const std::vector<AgentConstraintSet>& sets,
                                           const Layout& layout, const Box& box,
                                           const SmoothingParams& params, Sampler& rng,
                                           int pairs) {
  double worst_scaled = kInf;
  double strict = kInf;
  for (int p = 0; p < pairs; ++p) {
    const Vector x = random_point(rng, box, layout.agents);
    const Vector y = random_point(rng, box, layout.agents);
    const Vector mid = 0.5 * (x + y);
    const double fx = global_objective_log(sets, x, layout, params);
    const double fy = global_objective_log(sets, y, layout, params);
    const double fm = global_objective_log(sets, mid, layout, params);
    const double gap = 0.5 * fx + 0.5 * fy - fm;
    const double scale = std::max({1.0, std::abs(fx), std::abs(fy)});
    worst_scaled = std::min(worst_scaled, gap / scale);
    strict = std::min(strict, gap);
  }
  return {worst_scaled, strict};
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(results.begin(), results.end(),
                     [](const PropertyResult& r) { return r.passed || r.skipped; });
}

Scenario random_scenario(Sampler& rng, const RandomScenarioOptions& o) {
  Scenario s;
  s.name = "random";
  s.agents = o.min_agents + rng.index(o.max_agents - o.min_agents + 1);
  s.dim = o.min_dim + rng.index(o.max_dim - o.min_dim + 1);
  const Box box = cube(s.dim, o.coordinate_range);
  for (int i = 0; i < s.agents; ++i) {
    const int m = 1 + rng.index(o.max_atoms_per_agent);
    for (int k = 0; k < m; ++k) {
      const bool forced_fixed = o.fixed_inside_per_agent && k == 0;
      const Sense sense =
          forced_fixed || !o.allow_outside || rng.unit() < 0.6 ? Sense::Inside : Sense::Outside;
      const double radius = rng.uniform(0.1, 3.0);
      Anchor anchor = FixedPoint{rng.in_box(box)};
      if (!forced_fixed && s.agents > 1 && rng.unit() < 0.5) {
        int j = rng.index(s.agents - 1);
        if (j >= i) ++j;
        anchor = AgentRef{j};
      }
      s.constraints.emplace_back(i, sense, radius, std::move(anchor));
    }
  }
  for (int i = 0; i < s.agents; ++i) {
    for (int j = i + 1; j < s.agents; ++j) s.communication.emplace_back(i, j);
  }
  s.init_box = box;
  return s;
}

double gradient_relative_error(const Vector& analytic, const Vector& numeric, double value) {
  const double diff = (analytic - numeric).lpNorm<Eigen::Infinity>();
  const double denom = std::max({numeric.lpNorm<Eigen::Infinity>(), 1e-3 * std::abs(value),
                                 std::numeric_limits<double>::min()});
  return diff / denom;
}

SuiteReport verify_bounds(const VerifyOptions& options) {
  SuiteReport report{"bounds", {}};
  for (const auto& name : cases_or(options, {"A", "B", "C", "D", "E"})) {
    const Problem problem = compile(builtin_case(name));
    const auto& layout = problem.layout;
    const auto& gains = problem.scenario.gains;
    const double slack = options.tol.sandwich_slack;
    Sampler rng(options.seed);
    const Box box = effective_init_box(problem.scenario);
    const int m_bar = max_atom_count(problem.sets);

    Tracker alpha(fmt::format("case {}: alpha_i <= alpha_bar_i <= alpha_i + ln(m_i)/nu_alpha", name),
                  slack, options.seed);
    Tracker beta(fmt::format("case {}: beta <= beta_bar <= beta + ln(N)/nu_beta + ln(m)/nu_alpha", name),
                 slack, options.seed);
    Tracker tighten(fmt::format("case {}: larger nu_alpha never loosens alpha_i", name), slack,
                    options.seed);
    for (int s = 0; s < options.samples; ++s) {
      const Vector x = random_point(rng, box, layout.agents);
      const double nu_beta = rng.uniform(gains.nu_beta.initial, gains.nu_beta.nominal);
      const SmoothingParams params{gains.nu_alpha, nu_beta};
      const std::string where = fmt::format("sample {}", s);
      for (const auto& set : problem.sets) {
        const double a = smooth_alpha(set, x, layout, params.nu_alpha);
        const double abar = consolidated_alpha_bar(set, x, layout);
        alpha.observe(std::min(abar - a, a + std::log(set.size()) / params.nu_alpha - abar), where);

        const double nu1 = rng.uniform(0.5, 10.0);
        const double nu2 = nu1 * (1.0 + rng.unit());
        tighten.observe(std::abs(abar - smooth_alpha(set, x, layout, nu1)) -
                            std::abs(abar - smooth_alpha(set, x, layout, nu2)),
                        where);
      }
      const double b = smooth_beta(problem.sets, x, layout, params);
      const double bbar = global_beta_bar(problem.sets, x, layout);
      const double upper = b + std::log(static_cast<double>(layout.agents)) / nu_beta +
                           std::log(static_cast<double>(m_bar)) / params.nu_alpha;
      beta.observe(std::min(bbar - b, upper - bbar), where);
    }
    report.results.push_back(alpha.finish());
    report.results.push_back(beta.finish());
    report.results.push_back(tighten.finish());
  }
  return report;
}

SuiteReport verify_gradients(const VerifyOptions& options) {
  SuiteReport report{"gradients", {}};
  const auto& tol = options.tol;
  Sampler rng(options.seed);
  // Threshold on (tol - error): passes when >= 0.
  Tracker atoms("grad_atom vs central differences", 0.0, options.seed);
  Tracker locals("grad f_i vs central differences of exp(ln f_i)", 0.0, options.seed);
  Tracker identity("grad beta == -grad f / (nu_beta f)", 0.0, options.seed);
  const int instances = std::max(options.samples, 200);
  int checked_locals = 0;
  for (int n = 0; n < instances; ++n) {
    const Scenario s = random_scenario(rng);
    const auto sets = constraint_sets(s);
    const Layout layout = s.layout();
    const Vector x = random_point(rng, *s.init_box, layout.agents);
    const SmoothingParams params{rng.uniform(0.5, 5.0), rng.uniform(0.5, 5.0)};
    const std::string where = fmt::format("instance {}", n);

    for (const auto& atom : s.constraints) {
      const Vector g = grad_atom(atom, x, layout).to_dense(layout);
      const Vector fd = central_difference(
          [&](const Vector& p) { return eval_atom(atom, p, layout); }, x, tol.fd_step);
      atoms.observe(tol.fd_relative_error -
                        gradient_relative_error(g, fd, eval_atom(atom, x, layout)),
                    where);
    }
    for (const auto& set : sets) {
      const double log_f = local_objective_log(set, x, layout, params);
      // Only where f_i and its difference quotients stay representable.
      if (log_f > 300.0) continue;
      ++checked_locals;
      const Vector g = grad_local_objective(set, x, layout, params, tol);
      const Vector fd = central_difference(
          [&](const Vector& p) { return std::exp(local_objective_log(set, p, layout, params)); }, x,
          tol.fd_step);
      locals.observe(tol.fd_relative_error - gradient_relative_error(g, fd, std::exp(log_f)), where);
    }
    const double log_f = global_objective_log(sets, x, layout, params);
    if (log_f < 300.0) {
      Vector grad_f = Vector::Zero(layout.size());
      for (const auto& set : sets) grad_f += grad_local_objective(set, x, layout, params, tol);
      const Vector via_f = -grad_f / (params.nu_beta * std::exp(log_f));
      const Vector direct = grad_smooth_beta(sets, x, layout, params);
      const double err = (via_f - direct).lpNorm<Eigen::Infinity>() /
                         std::max(1.0, direct.lpNorm<Eigen::Infinity>());
      identity.observe(1e-10 - err, where);
    }
  }
  report.results.push_back(atoms.finish());
  auto local = locals.finish();
  local.detail += fmt::format("{}{} local objectives checked", local.detail.empty() ? "" : "; ",
                              checked_locals);
  report.results.push_back(local);
  report.results.push_back(identity.finish());
  return report;
}

SuiteReport verify_convexity(const VerifyOptions& options) {
  SuiteReport report{"convexity", {}};
  const auto& tol = options.tol;
  const int pairs = std::max(options.samples, 500);

  if (!options.cases.empty()) {
    for (const auto& name : options.cases) {
      const Problem problem = compile(builtin_case(name));
      const auto& gains = problem.scenario.gains;
      const SmoothingParams params{gains.nu_alpha, gains.nu_beta.nominal};
      if (!all_inside(problem.scenario)) {
        PropertyResult r;
        r.name = fmt::format("case {}: midpoint log-convexity", name);
        r.skipped = true;
        r.seed = options.seed;
        r.detail = "log-convexity hypotheses not met (Outside atoms present); strictness skipped";
        report.results.push_back(r);
        continue;
      }
      Sampler rng(options.seed);
      const Box box = effective_init_box(problem.scenario);
      const auto [worst, strict] =
          midpoint_margins(problem.sets, problem.layout, box, params, rng, pairs);
      Tracker convex(fmt::format("case {}: midpoint log-convexity", name), -tol.convexity_slack,
                     options.seed);
      convex.observe(worst, "");
      report.results.push_back(convex.finish());
      if (fixed_inside_per_agent(problem.sets)) {
        Tracker strict_t(fmt::format("case {}: strict midpoint margin", name),
                         tol.strict_convexity_margin, options.seed);
        strict_t.observe(strict, "");
        report.results.push_back(strict_t.finish());
      } else {
        PropertyResult r;
        r.name = fmt::format("case {}: strict midpoint margin", name);
        r.skipped = true;
        r.seed = options.seed;
        r.detail = "not every agent owns a fixed-anchor Inside atom; strictness not claimed";
        report.results.push_back(r);
      }
    }
    return report;
  }

  // Random all-Inside scenarios, one pair per scenario.
  Sampler rng(options.seed);
  Tracker convex("random all-Inside scenarios: midpoint log-convexity", -tol.convexity_slack,
                 options.seed);
  Tracker strict("random scenarios with fixed Inside atoms: strict midpoint margin",
                 tol.strict_convexity_margin, options.seed);
  RandomScenarioOptions plain;
  plain.allow_outside = false;
  RandomScenarioOptions anchored = plain;
  anchored.fixed_inside_per_agent = true;
  for (int p = 0; p < pairs; ++p) {
    const std::string where = fmt::format("pair {}", p);
    {
      const Scenario s = random_scenario(rng, plain);
      const SmoothingParams params{rng.uniform(0.5, 5.0), rng.uniform(0.5, 5.0)};
      const auto [worst, unused] =
          midpoint_margins(constraint_sets(s), s.layout(), *s.init_box, params, rng, 1);
      convex.observe(worst, where);
    }
    {
      const Scenario s = random_scenario(rng, anchored);
      const SmoothingParams params{rng.uniform(0.5, 5.0), rng.uniform(0.5, 5.0)};
      const auto [worst, margin] =
          midpoint_margins(constraint_sets(s), s.layout(), *s.init_box, params, rng, 1);
      convex.observe(worst, where);
      strict.observe(margin, where);
    }
  }
  report.results.push_back(convex.finish());
  report.results.push_back(strict.finish());
  return report;
}

SuiteReport verify_conservation(const VerifyOptions& options) {
  SuiteReport report{"conservation", {}};
  for (const auto& name : cases_or(options, {"A"})) {
    const Problem problem = compile(builtin_case(name));
    RunOptions run_options;
    run_options.early_stop = false;
    run_options.tol = options.tol;
    const auto record = run(problem, options.seed, run_options);

    Tracker drift(fmt::format("case {}: |sum_i z_i| stays below {:g}", name,
                              options.tol.integral_conservation),
                  0.0, options.seed);
    drift.observe(options.tol.integral_conservation - record.max_integral_drift,
                  fmt::format("max drift {:.3g}", record.max_integral_drift));
    auto d = drift.finish();
    d.detail = fmt::format("max |sum z| = {:.3g} over {} steps", record.max_integral_drift, record.steps);
    report.results.push_back(d);

    PropertyResult coherence;
    coherence.name = fmt::format("case {}: positions equal own estimate blocks bit-for-bit", name);
    coherence.seed = options.seed;
    coherence.worst_margin =
        record.coherence_violations == 0 ? 0.0 : -static_cast<double>(record.coherence_violations);
    coherence.passed = record.coherence_violations == 0;
    coherence.detail = fmt::format("{} of {} samples differ", record.coherence_violations,
                                   record.samples());
    report.results.push_back(coherence);
  }
  return report;
}

SuiteReport verify_oracle(const VerifyOptions& options) {
  SuiteReport report{"oracle", {}};
  constexpr double kAgreement = 0.05;
  for (const auto& name : cases_or(options, {"A", "B", "C", "D"})) {
    const Problem problem = compile(builtin_case(name));
    const auto& gains = problem.scenario.gains;
    const SmoothingParams params{gains.nu_alpha, gains.nu_beta.nominal};
    const auto oracle = centralized_maximize(problem, params, options.oracle_restarts, options.seed,
                                             options.tol);
    RunOptions run_options;
    run_options.tol = options.tol;
    const auto record = run(problem, options.seed, run_options);

    const double gap = (oracle.x - record.final_positions).lpNorm<Eigen::Infinity>();
    PropertyResult r;
    r.seed = options.seed;
    if (all_inside(problem.scenario)) {
      r.name = fmt::format("case {}: distributed vs centralized optimum within {}", name, kAgreement);
      r.worst_margin = kAgreement - gap;
      r.passed = gap <= kAgreement;
      r.detail = fmt::format("inf-norm gap {:.4g}; oracle beta {:.4f}, beta_bar {:.4f}", gap,
                             oracle.beta, oracle.beta_bar);
    } else {
      // Nonconvex: the formation is not unique, so only report.
      r.name = fmt::format("case {}: centralized optimum survey", name);
      r.skipped = true;
      r.worst_margin = kAgreement - gap;
      r.detail = fmt::format("{} distinct local optima over {} restarts; best beta {:.4f}, "
                             "beta_bar {:.4f}; distributed gap {:.4g}",
                             oracle.distinct_optima, oracle.successful_restarts, oracle.beta,
                             oracle.beta_bar, gap);
    }
    report.results.push_back(r);

    const double m_bar = max_atom_count(problem.sets);
    const double upper = oracle.beta + std::log(static_cast<double>(problem.layout.agents)) / params.nu_beta +
                         std::log(m_bar) / params.nu_alpha;
    Tracker bounds(fmt::format("case {}: sandwich at the centralized optimum", name),
                   options.tol.sandwich_slack, options.seed);
    bounds.observe(std::min(oracle.beta_bar - oracle.beta, upper - oracle.beta_bar), "");
    report.results.push_back(bounds.finish());

    Tracker ascent(fmt::format("case {}: ascent is monotone", name), 0.0, options.seed);
    for (const auto& trace : oracle.restarts) {
      for (std::size_t k = 1; k < trace.beta_history.size(); ++k) {
        ascent.observe(trace.beta_history[k] - trace.beta_history[k - 1], "");
      }
    }
    report.results.push_back(ascent.finish());
  }
  return report;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"bounds", "gradients", "convexity", "conservation",
                                              "oracle", "all"};
  return names;
}

std::vector<SuiteReport> run_suite(const std::string& name, const VerifyOptions& options) {
  if (name == "bounds") return {verify_bounds(options)};
  if (name == "gradients") return {verify_gradients(options)};
  if (name == "convexity") return {verify_convexity(options)};
  if (name == "conservation") return {verify_conservation(options)};
  if (name == "oracle") return {verify_oracle(options)};
  if (name == "all") {
    return {verify_bounds(options), verify_gradients(options), verify_convexity(options),
            verify_conservation(options), verify_oracle(options)};
  }
  throw ConfigError(fmt::format("unknown suite '{}'", name));
}

std::string format_report(const SuiteReport& report) {
  std::string out;
  for (const auto& r : report.results) {
    const char* status = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
    out += fmt::format("[{}] {}: {} (worst margin {:.3g}, seed {})", status, report.suite, r.name,
                       r.worst_margin, r.seed);
    if (!r.detail.empty()) out += " - " + r.detail;
    out += '\n';
  }
  return out;
}

}  // namespace formation
