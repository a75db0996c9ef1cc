#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "formation/optimizer.hpp"
#include "formation/oracle.hpp"

namespace formation {

// Header: t,x1_1,...,xN_d,beta_bar,beta,consensus_err,nu_beta
// Values use 17 significant digits; rows end with '\n'.
std::string trajectory_csv_header(const Layout& layout);
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record);

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  Layout layout;
  Vector final_positions;
  double final_time = 0.0;
  double beta_bar = 0.0;
  double beta = 0.0;
  double consensus_error = 0.0;
  Verdict verdict = Verdict::Infeasible;
  std::optional<double> satisfaction_time;
  bool stopped_early = false;
};

RunSummary summarize(const Problem& problem, std::uint64_t seed, const TrajectoryRecord& record,
                     double feasibility_margin = kDefaultTolerances.feasibility_margin);
void write_summary(std::ostream& out, const RunSummary& summary);

}  // namespace formation
