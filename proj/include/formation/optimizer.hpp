#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "formation/config.hpp"
#include "formation/scenario.hpp"
#include "formation/schedule.hpp"

namespace formation {

// Every agent i keeps an estimate of the whole stacked formation (column i of
// `estimates`, length N*d) and an integral state z_i (column i of
// `integrals`). Agent positions track the own block of the estimate.
struct OptimizerState {
  Eigen::MatrixXd estimates;
  Eigen::MatrixXd integrals;
  Vector positions;
  double t = 0.0;

  // Sum over agents of z_i; stays at zero for a run started from z = 0.
  Vector integral_sum() const { return integrals.rowwise().sum(); }
};

struct StateDerivative {
  Eigen::MatrixXd estimates;
  Eigen::MatrixXd integrals;

  double norm() const;
};

// z_i(0) = 0, own estimate block = initial position, every other block drawn
// uniformly from `box` (default: the scenario's sampling box). Positions come
// from the scenario when it provides them, otherwise from the same box.
OptimizerState init_state(const Problem& problem, std::uint64_t seed,
                          const std::optional<Box>& box = std::nullopt);

// dx~_i/dt = -k1 grad f_i(x~_i) - k2 sum_{j in N_i} (x~_i - x~_j) - z_i
// dz_i/dt  =  k1 k2 sum_{j in N_i} (x~_i - x~_j)
// Every agent reads the same snapshot. Throws IntegrationError when an
// agent's gradient saturates or any term is not finite.
StateDerivative vector_field(const OptimizerState& state, const Problem& problem,
                             const GainSchedule& gains, double nu_beta,
                             const Tolerances& tol = kDefaultTolerances);
// Uses nu_beta(state.t) from the schedule.
StateDerivative vector_field(const OptimizerState& state, const Problem& problem,
                             const GainSchedule& gains);

// One classical RK4 step with nu_beta frozen at the step-start time.
OptimizerState step(const OptimizerState& state, double dt, const Problem& problem,
                    const GainSchedule& gains, const Tolerances& tol = kDefaultTolerances);

// |(Laplacian kron I) x~|_2
double consensus_error(const OptimizerState& state, const Problem& problem);

struct TrajectoryRecord {
  Layout layout;
  std::vector<double> times;
  std::vector<Vector> positions;
  std::vector<double> beta_bar;
  std::vector<double> beta;  // evaluated with the nu_beta of that sample
  std::vector<double> consensus_error;
  std::vector<double> nu_beta;
  Vector final_positions;
  OptimizerState final_state;

  double max_integral_drift = 0.0;    // max over samples of |sum_i z_i|
  std::size_t coherence_violations = 0;  // samples where x_i != own estimate block
  std::size_t steps = 0;
  bool stopped_early = false;

  std::size_t samples() const { return times.size(); }
};

struct RunOptions {
  bool early_stop = true;
  std::optional<Box> init_box;
  Tolerances tol = kDefaultTolerances;
  // Called after every recorded sample.
  std::function<void(double t, double beta_bar, double consensus_error)> on_sample;
};

// Integrates from t = 0 to the horizon with the scenario's dt, sampling every
// `sample_every` seconds (t = 0 and the final time are always recorded).
// Deterministic for a given (problem, seed). Refuses problems whose task
// graph has several clusters; use run_clusters for those.
TrajectoryRecord run(const Problem& problem, std::uint64_t seed, const RunOptions& options = {});

// Runs each dependency cluster as an independent sub-simulation and merges
// the samples. Early stopping is disabled so the clusters stay aligned.
TrajectoryRecord run_clusters(const Problem& problem, std::uint64_t seed,
                              const RunOptions& options = {});

// First sample time after which beta_bar stays positive, if any.
std::optional<double> satisfaction_time(const TrajectoryRecord& record);

}  // namespace formation
