#include "formation/errors.hpp"

#include <fmt/format.h>

namespace formation {

SaturationError::SaturationError(int agent, double log_value)
    : std::runtime_error(fmt::format(
          "local objective of agent {} saturated (ln f = {:.6g}); try a smaller "
          "dt or a lower nu_beta",
          agent + 1, log_value)),
      agent_(agent),
      log_value_(log_value) {}

IntegrationError::IntegrationError(double time, int agent, std::string term)
    : std::runtime_error(fmt::format("integration failed at t = {:.6g}: agent {}, {}",
                                     time, agent + 1, term)),
      time_(time),
      agent_(agent),
      term_(std::move(term)) {}

namespace {
std::string join_issues(const std::vector<Issue>& issues) {
  std::string out = "invalid scenario";
  for (const auto& issue : issues) {
    out += "\n  ";
    if (!issue.path.empty()) out += issue.path + ": ";
    out += issue.message;
  }
  return out;
}
}  // namespace

ScenarioError::ScenarioError(std::vector<Issue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

}  // namespace formation
