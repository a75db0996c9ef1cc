#include "formation/optimizer.hpp"

#include <cmath>
#include <cstring>

#include <fmt/format.h>

#include "formation/constraints.hpp"
#include "formation/sampling.hpp"

namespace formation {

namespace {

bool finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

// sum_{j in N_i} (x~_i - x~_j)
Vector disagreement(const Eigen::MatrixXd& estimates, const CommGraph& comm, int agent) {
  Vector c = Vector::Zero(estimates.rows());
  for (int j : comm.neighbors(agent)) c += estimates.col(agent) - estimates.col(j);
  return c;
}

void sync_positions(OptimizerState& s, const Layout& layout) {
  for (int i = 0; i < layout.agents; ++i) {
    s.positions.segment(i * layout.dim, layout.dim) =
        s.estimates.col(i).segment(i * layout.dim, layout.dim);
  }
}

bool positions_coherent(const OptimizerState& s, const Layout& layout) {
  for (int i = 0; i < layout.agents; ++i) {
    const double* own = s.estimates.col(i).data() + i * layout.dim;
    const double* pos = s.positions.data() + i * layout.dim;
    if (std::memcmp(own, pos, sizeof(double) * layout.dim) != 0) return false;
  }
  return true;
}

OptimizerState advance(const OptimizerState& s, const StateDerivative& d, double h) {
  OptimizerState out;
  out.estimates = s.estimates + h * d.estimates;
  out.integrals = s.integrals + h * d.integrals;
  out.positions = s.positions;
  out.t = s.t;
  return out;
}

struct StepResult {
  OptimizerState state;
  double field_norm;  // norm of the field at the step start
};

StepResult rk4(const OptimizerState& s, double dt, const Problem& problem,
               const GainSchedule& gains, const Tolerances& tol) {
  const double nu_beta = nu_beta_at(s.t, gains.nu_beta);
  const auto k1 = vector_field(s, problem, gains, nu_beta, tol);
  const auto k2 = vector_field(advance(s, k1, 0.5 * dt), problem, gains, nu_beta, tol);
  const auto k3 = vector_field(advance(s, k2, 0.5 * dt), problem, gains, nu_beta, tol);
  const auto k4 = vector_field(advance(s, k3, dt), problem, gains, nu_beta, tol);

  StepResult r;
  r.state.estimates = s.estimates + (dt / 6.0) * (k1.estimates + 2.0 * k2.estimates +
                                                  2.0 * k3.estimates + k4.estimates);
  r.state.integrals = s.integrals + (dt / 6.0) * (k1.integrals + 2.0 * k2.integrals +
                                                  2.0 * k3.integrals + k4.integrals);
  r.state.t = s.t + dt;
  for (int i = 0; i < problem.layout.agents; ++i) {
    if (!finite(r.state.estimates.col(i))) throw IntegrationError(s.t, i, "estimate update");
    if (!finite(r.state.integrals.col(i))) throw IntegrationError(s.t, i, "integral update");
  }
  r.state.positions.resize(problem.layout.size());
  sync_positions(r.state, problem.layout);
  r.field_norm = k1.norm();
  return r;
}

void record_sample(TrajectoryRecord& rec, const OptimizerState& s, const Problem& problem,
                   const GainSchedule& gains, const RunOptions& options) {
  const double nu_beta = nu_beta_at(s.t, gains.nu_beta);
  const double bb = global_beta_bar(problem.sets, s.positions, problem.layout);
  const double err = consensus_error(s, problem);
  rec.times.push_back(s.t);
  rec.positions.push_back(s.positions);
  rec.beta_bar.push_back(bb);
  rec.beta.push_back(
      smooth_beta(problem.sets, s.positions, problem.layout, {gains.nu_alpha, nu_beta}));
  rec.consensus_error.push_back(err);
  rec.nu_beta.push_back(nu_beta);
  rec.max_integral_drift = std::max(rec.max_integral_drift, s.integral_sum().norm());
  if (!positions_coherent(s, problem.layout)) ++rec.coherence_violations;
  if (options.on_sample) options.on_sample(s.t, bb, err);
}

}  // namespace

double StateDerivative::norm() const {
  return std::sqrt(estimates.squaredNorm() + integrals.squaredNorm());
}

OptimizerState init_state(const Problem& problem, std::uint64_t seed,
                          const std::optional<Box>& box) {
  const auto& layout = problem.layout;
  const Box sampling = box ? *box : effective_init_box(problem.scenario);
  if (sampling.lower.size() != layout.dim || sampling.upper.size() != layout.dim) {
    throw ConfigError("initialization box dimension does not match the scenario");
  }
  Sampler rng(seed);
  OptimizerState s;
  s.t = 0.0;
  s.positions.resize(layout.size());
  if (problem.scenario.initial_positions) {
    s.positions = *problem.scenario.initial_positions;
  } else {
    for (int i = 0; i < layout.agents; ++i) {
      s.positions.segment(i * layout.dim, layout.dim) = rng.in_box(sampling);
    }
  }
  s.estimates.resize(layout.size(), layout.agents);
  for (int i = 0; i < layout.agents; ++i) {
    for (int j = 0; j < layout.agents; ++j) {
      s.estimates.col(i).segment(j * layout.dim, layout.dim) =
          i == j ? Vector(s.positions.segment(j * layout.dim, layout.dim)) : rng.in_box(sampling);
    }
  }
  s.integrals = Eigen::MatrixXd::Zero(layout.size(), layout.agents);
  return s;
}

StateDerivative vector_field(const OptimizerState& state, const Problem& problem,
                             const GainSchedule& gains, double nu_beta, const Tolerances& tol) {
  const auto& layout = problem.layout;
  const SmoothingParams params{gains.nu_alpha, nu_beta};
  StateDerivative d;
  d.estimates.resize(layout.size(), layout.agents);
  d.integrals.resize(layout.size(), layout.agents);
  for (int i = 0; i < layout.agents; ++i) {
    Vector grad;
    try {
      grad = grad_local_objective(problem.sets[i], state.estimates.col(i), layout, params, tol);
    } catch (const SaturationError& e) {
      throw IntegrationError(state.t, i, fmt::format("local gradient saturated ({})", e.what()));
    }
    if (!finite(grad)) throw IntegrationError(state.t, i, "local gradient not finite");
    const Vector c = disagreement(state.estimates, problem.comm_graph, i);
    if (!finite(c)) throw IntegrationError(state.t, i, "consensus term not finite");
    if (!finite(state.integrals.col(i))) throw IntegrationError(state.t, i, "integral state not finite");
    d.estimates.col(i) = -gains.k1 * grad - gains.k2 * c - state.integrals.col(i);
    d.integrals.col(i) = (gains.k1 * gains.k2) * c;
  }
  return d;
}

StateDerivative vector_field(const OptimizerState& state, const Problem& problem,
                             const GainSchedule& gains) {
  return vector_field(state, problem, gains, nu_beta_at(state.t, gains.nu_beta));
}

OptimizerState step(const OptimizerState& state, double dt, const Problem& problem,
                    const GainSchedule& gains, const Tolerances& tol) {
  if (!(dt > 0.0)) throw ConfigError(fmt::format("step size must be positive, got {}", dt));
  return rk4(state, dt, problem, gains, tol).state;
}

double consensus_error(const OptimizerState& state, const Problem& problem) {
  double sq = 0.0;
  for (int i = 0; i < problem.layout.agents; ++i) {
    sq += disagreement(state.estimates, problem.comm_graph, i).squaredNorm();
  }
  return std::sqrt(sq);
}

TrajectoryRecord run(const Problem& problem, std::uint64_t seed, const RunOptions& options) {
  if (problem.clusters.clusters.size() > 1) {
    throw ScenarioError({{"constraints",
                          fmt::format("task dependency graph has {} independent clusters; run "
                                      "them as separate sub-simulations",
                                      problem.clusters.clusters.size())}});
  }
  const auto& scenario = problem.scenario;
  const auto& gains = scenario.gains;
  gains.validate();
  const double dt = scenario.integration.dt;
  const long long n_steps = std::llround(scenario.integration.horizon / dt);
  const long long stride = std::max(1LL, std::llround(scenario.integration.sample_every / dt));
  const double ramp_end = gains.nu_beta.ramp_end();

  TrajectoryRecord rec;
  rec.layout = problem.layout;
  OptimizerState state = init_state(problem, seed, options.init_box);
  record_sample(rec, state, problem, gains, options);

  int quiet_steps = 0;
  for (long long n = 1; n <= n_steps; ++n) {
    auto result = rk4(state, dt, problem, gains, options.tol);
    state = std::move(result.state);
    // Clock from the step count, not accumulated additions.
    state.t = static_cast<double>(n) * dt;
    ++rec.steps;

    bool stop = false;
    if (options.early_stop && state.t >= ramp_end) {
      const bool quiet = result.field_norm < options.tol.early_stop_field &&
                         consensus_error(state, problem) < options.tol.early_stop_consensus;
      quiet_steps = quiet ? quiet_steps + 1 : 0;
      stop = quiet_steps >= options.tol.early_stop_steps;
    }
    if (n % stride == 0 || n == n_steps || stop) record_sample(rec, state, problem, gains, options);
    if (stop) {
      rec.stopped_early = n < n_steps;
      break;
    }
  }
  rec.final_positions = state.positions;
  rec.final_state = std::move(state);
  return rec;
}

TrajectoryRecord run_clusters(const Problem& problem, std::uint64_t seed,
                              const RunOptions& options) {
  if (problem.clusters.clusters.size() <= 1) return run(problem, seed, options);

  const auto& layout = problem.layout;
  RunOptions sub_options = options;
  sub_options.early_stop = false;
  sub_options.on_sample = nullptr;
  if (!sub_options.init_box) sub_options.init_box = effective_init_box(problem.scenario);

  std::vector<TrajectoryRecord> parts;
  for (std::size_t c = 0; c < problem.clusters.clusters.size(); ++c) {
    const auto sub = compile(restrict_to_cluster(problem.scenario, problem.clusters.clusters[c]));
    parts.push_back(run(sub, seed + c, sub_options));
  }

  TrajectoryRecord rec;
  rec.layout = layout;
  rec.times = parts.front().times;
  rec.nu_beta = parts.front().nu_beta;
  rec.final_positions = Vector::Zero(layout.size());
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    Vector x(layout.size());
    double err_sq = 0.0;
    for (std::size_t c = 0; c < parts.size(); ++c) {
      const auto& cluster = problem.clusters.clusters[c];
      for (std::size_t a = 0; a < cluster.size(); ++a) {
        x.segment(cluster[a] * layout.dim, layout.dim) =
            parts[c].positions[k].segment(static_cast<int>(a) * layout.dim, layout.dim);
      }
      err_sq += parts[c].consensus_error[k] * parts[c].consensus_error[k];
    }
    const double bb = global_beta_bar(problem.sets, x, layout);
    rec.positions.push_back(x);
    rec.beta_bar.push_back(bb);
    rec.beta.push_back(smooth_beta(problem.sets, x, layout,
                                   {problem.scenario.gains.nu_alpha, rec.nu_beta[k]}));
    rec.consensus_error.push_back(std::sqrt(err_sq));
    if (options.on_sample) options.on_sample(rec.times[k], bb, rec.consensus_error.back());
  }
  for (const auto& p : parts) {
    rec.max_integral_drift = std::max(rec.max_integral_drift, p.max_integral_drift);
    rec.coherence_violations += p.coherence_violations;
    rec.steps = std::max(rec.steps, p.steps);
  }
  rec.final_positions = rec.positions.back();
  return rec;
}

std::optional<double> satisfaction_time(const TrajectoryRecord& record) {
  std::optional<double> onset;
  for (std::size_t k = 0; k < record.samples(); ++k) {
    if (record.beta_bar[k] > 0.0) {
      if (!onset) onset = record.times[k];
    } else {
      onset.reset();
    }
  }
  return onset;
}

}  // namespace formation
