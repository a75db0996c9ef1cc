#include <cmath>

#include "doctest.h"
#include "formation/errors.hpp"
#include "formation/oracle.hpp"

using namespace formation;
using doctest::Approx;

namespace {

SmoothingParams nominal(const Problem& p) { return {p.scenario.gains.nu_alpha, p.scenario.gains.nu_beta.nominal}; }

}  // namespace

TEST_CASE("centralized optimum of Case A is consensus at [2,0]") {
  const Problem p = compile(builtin_case("A"));
  const auto r = centralized_maximize(p, nominal(p), 20, 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(r.x[2 * i] == Approx(2.0).epsilon(1e-3));
    CHECK(std::abs(r.x[2 * i + 1]) <= 1e-3);
  }
  CHECK(r.beta_bar == Approx(1.0).epsilon(1e-3));
  CHECK(r.successful_restarts == 20);
  CHECK(r.distinct_optima == 1);
}

TEST_CASE("Case C optimum") {
  const Problem p = compile(builtin_case("C"));
  const auto r = centralized_maximize(p, nominal(p), 20, 1);
  CHECK(std::abs(r.beta_bar - 0.1) <= 0.03);
  CHECK(std::abs(r.beta + 0.1) <= 0.03);
  CHECK(feasibility_verdict(r.beta_bar) == Verdict::TightlyFeasible);
}

TEST_CASE("verdicts") {
  CHECK(feasibility_verdict(1.0) == Verdict::Feasible);
  CHECK(feasibility_verdict(0.1) == Verdict::TightlyFeasible);
  CHECK(feasibility_verdict(-0.18) == Verdict::Infeasible);
  CHECK(feasibility_verdict(0.0) == Verdict::Infeasible);
  CHECK(std::string(to_string(Verdict::TightlyFeasible)) == "TightlyFeasible");

  const Problem b = compile(builtin_case("B"));
  CHECK(feasibility_verdict(centralized_maximize(b, nominal(b), 10, 2).beta_bar) == Verdict::Feasible);
  const Problem d = compile(builtin_case("D"));
  const auto rd = centralized_maximize(d, nominal(d), 10, 2);
  CHECK(feasibility_verdict(d, rd.x) == Verdict::Infeasible);
  CHECK(rd.beta == Approx(-0.35).epsilon(0.05 / 0.35));
}

TEST_CASE("ascent never decreases beta") {
  const Problem p = compile(builtin_case("E"));
  const auto r = centralized_maximize(p, nominal(p), 10, 3);
  for (const auto& trace : r.restarts) {
    for (std::size_t k = 1; k < trace.beta_history.size(); ++k) {
      CHECK(trace.beta_history[k] >= trace.beta_history[k - 1]);
    }
  }
  CHECK(r.distinct_optima >= 1);
}

TEST_CASE("oracle argument checks") {
  const Problem p = compile(builtin_case("A"));
  CHECK_THROWS_AS(centralized_maximize(p, nominal(p), 0, 1), ConfigError);
  CHECK_THROWS_AS(centralized_maximize(p, {0.0, 5.0}, 1, 1), ConfigError);
}
