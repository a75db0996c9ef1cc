#include "formation/report.hpp"

#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace formation {

std::string trajectory_csv_header(const Layout& layout) {
  std::string h = "t";
  for (int i = 0; i < layout.agents; ++i) {
    for (int k = 0; k < layout.dim; ++k) h += fmt::format(",x{}_{}", i + 1, k + 1);
  }
  h += ",beta_bar,beta,consensus_err,nu_beta";
  return h;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& record) {
  out << trajectory_csv_header(record.layout) << '\n';
  fmt::memory_buffer row;
  for (std::size_t s = 0; s < record.samples(); ++s) {
    row.clear();
    fmt::format_to(std::back_inserter(row), "{:.17g}", record.times[s]);
    const auto& x = record.positions[s];
    for (Eigen::Index k = 0; k < x.size(); ++k) fmt::format_to(std::back_inserter(row), ",{:.17g}", x[k]);
    fmt::format_to(std::back_inserter(row), ",{:.17g},{:.17g},{:.17g},{:.17g}\n", record.beta_bar[s],
                   record.beta[s], record.consensus_error[s], record.nu_beta[s]);
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

RunSummary summarize(const Problem& problem, std::uint64_t seed, const TrajectoryRecord& record,
                     double feasibility_margin) {
  RunSummary s;
  s.scenario = problem.scenario.name;
  s.seed = seed;
  s.layout = record.layout;
  s.final_positions = record.final_positions;
  s.final_time = record.times.back();
  s.beta_bar = record.beta_bar.back();
  s.beta = record.beta.back();
  s.consensus_error = record.consensus_error.back();
  s.verdict = feasibility_verdict(s.beta_bar, feasibility_margin);
  s.satisfaction_time = satisfaction_time(record);
  s.stopped_early = record.stopped_early;
  return s;
}

void write_summary(std::ostream& out, const RunSummary& s) {
  fmt::print(out, "scenario: {}\n", s.scenario.empty() ? "(unnamed)" : s.scenario);
  fmt::print(out, "seed: {}\n", s.seed);
  fmt::print(out, "final_time: {:.6g}{}\n", s.final_time, s.stopped_early ? " (converged early)" : "");
  for (int i = 0; i < s.layout.agents; ++i) {
    const auto p = s.final_positions.segment(i * s.layout.dim, s.layout.dim);
    fmt::print(out, "x{}: [{:.6f}]\n", i + 1, fmt::join(p.begin(), p.end(), ", "));
  }
  fmt::print(out, "beta_bar: {:.9g}\n", s.beta_bar);
  fmt::print(out, "beta: {:.9g}\n", s.beta);
  fmt::print(out, "verdict: {}\n", to_string(s.verdict));
  fmt::print(out, "consensus_error: {:.6g}\n", s.consensus_error);
  if (s.satisfaction_time) {
    fmt::print(out, "satisfaction_time: {:.6g}\n", *s.satisfaction_time);
  } else {
    fmt::print(out, "satisfaction_time: never\n");
  }
}

}  // namespace formation
