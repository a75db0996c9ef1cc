#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace formation {

// Bad indices, dimension mismatches, invalid parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ln f_i exceeded the safe exponentiation threshold. Usually means the
// nu_beta ramp starts too high for the initial violation.
class SaturationError : public std::runtime_error {
 public:
  SaturationError(int agent, double log_value);

  int agent() const { return agent_; }
  double log_value() const { return log_value_; }

 private:
  int agent_;
  double log_value_;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(double time, int agent, std::string term);

  double time() const { return time_; }
  int agent() const { return agent_; }
  const std::string& term() const { return term_; }

 private:
  double time_;
  int agent_;
  std::string term_;
};

struct Issue {
  std::string path;  // e.g. "constraints[2].radius", or "line 4, column 7"
  std::string message;
};

// Scenario parsing / validation failure. Carries every issue found, not just
// the first one.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<Issue> issues);

  const std::vector<Issue>& issues() const { return issues_; }

 private:
  std::vector<Issue> issues_;
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace formation
