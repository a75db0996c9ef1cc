#include <string>

#include "doctest.h"
#include "formation/errors.hpp"
#include "formation/scenario.hpp"
#include "json.hpp"

using namespace formation;
using nlohmann::json;

namespace {

// Every issue path joined, for substring checks.
std::string issue_text(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    std::string out;
    for (const auto& i : e.issues()) out += i.path + ": " + i.message + "\n";
    return out;
  }
  return "";
}

json case_json(const char* name) { return json::parse(serialize_scenario(builtin_case(name))); }

}  // namespace

TEST_CASE("round trip of every built-in case") {
  for (const auto& name : builtin_case_names()) {
    const Scenario s = builtin_case(name);
    CHECK(parse_scenario(serialize_scenario(s)) == s);
  }
  Scenario custom = builtin_case("A");
  Vector x0(6);
  x0 << 0, 0, 1, 1, 2, 2;
  custom.initial_positions = x0;
  custom.init_box = Box{Vector::Constant(2, -1), Vector::Constant(2, 1)};
  custom.auxiliary = {true, 400.0};
  custom.seed = 99;
  CHECK(parse_scenario(serialize_scenario(custom)) == custom);
}

TEST_CASE("constant nu_beta is accepted") {
  json j = case_json("A");
  j["smoothing"]["nu_beta"] = 3.0;
  const Scenario s = parse_scenario(j.dump());
  CHECK(nu_beta_at(0.0, s.gains.nu_beta) == 3.0);
  CHECK(nu_beta_at(100.0, s.gains.nu_beta) == 3.0);
}

TEST_CASE("semantic errors name the field") {
  json j = case_json("A");
  j["constraints"][1]["radius"] = -1;
  const std::string text = issue_text(j.dump());
  CHECK(text.find("constraints[1].radius") != std::string::npos);

  json several = case_json("A");
  several["constraints"][0]["owner"] = 7;
  several["integration"]["dt"] = 0.0;
  const std::string both = issue_text(several.dump());
  CHECK(both.find("constraints[0].owner") != std::string::npos);
  CHECK(both.find("integration.dt") != std::string::npos);

  json self = case_json("A");
  self["constraints"][1]["anchor"] = {{"agent", 2}};
  CHECK(issue_text(self.dump()).find("constraints[1]") != std::string::npos);

  json dims = case_json("A");
  dims["constraints"][0]["anchor"]["point"] = {1.0, 2.0, 3.0};
  CHECK(issue_text(dims.dump()).find("constraints[0].anchor") != std::string::npos);
}

TEST_CASE("syntax errors carry line and column") {
  const std::string text = issue_text("{\n  \"agents\": {\n    \"count\": ,\n  }\n}");
  CHECK(text.find("line 3") != std::string::npos);
}

TEST_CASE("communication that splits a cluster is rejected") {
  json j = case_json("A");
  j["communication"]["edges"] = {{1, 2}};
  const std::string text = issue_text(j.dump());
  CHECK(text.find("communication") != std::string::npos);
  CHECK(text.find("{1,2,3}") != std::string::npos);
}

TEST_CASE("missing file") {
  try {
    load_scenario("definitely/not/here.json");
    FAIL("expected an error");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("definitely/not/here.json") != std::string::npos);
  }
}

TEST_CASE("built-in case contents") {
  const Scenario a = builtin_case("A");
  CHECK(a.agents == 3);
  REQUIRE(a.constraints.size() == 3);
  CHECK(a.constraints[0] == ConstraintAtom::inside(0, 1.0, FixedPoint{Vector::Unit(2, 0) * 2.0}));
  CHECK(a.constraints[1] == ConstraintAtom::inside(1, 1.0, AgentRef{0}));
  CHECK(a.constraints[2] == ConstraintAtom::inside(2, 1.0, AgentRef{1}));
  CHECK(a.gains.k1 == 1.0);
  CHECK(a.gains.k2 == 1.0);
  CHECK(a.gains.nu_alpha == 5.0);
  CHECK(a.integration.dt == 0.01);
  CHECK(a.integration.horizon == 300.0);

  const Scenario e = builtin_case("E");
  REQUIRE(e.constraints.size() == 7);
  for (int k = 0; k < 3; ++k) CHECK(e.constraints[k] == a.constraints[k]);
  CHECK(e.constraints[3] == ConstraintAtom::outside(1, 0.2, AgentRef{0}));
  CHECK(e.constraints[4] == ConstraintAtom::inside(2, 1.0, AgentRef{0}));
  CHECK(e.constraints[5] == ConstraintAtom::outside(2, 0.2, AgentRef{0}));
  CHECK(e.constraints[6] == ConstraintAtom::outside(2, 0.2, AgentRef{1}));

  const Scenario ex = builtin_case("Example1");
  CHECK(ex.agents == 7);
  CHECK_THROWS_AS(compile(ex), ScenarioError);
  const Problem p = compile(ex, true);
  CHECK(p.clusters.clusters.size() == 2);

  CHECK_THROWS(builtin_case("Z"));
}

TEST_CASE("sampling box and auxiliary constraint") {
  const Scenario a = builtin_case("A");
  const Box box = default_init_box(a);
  CHECK(box.lower[0] == -0.0);
  CHECK(box.upper[0] == 4.0);
  CHECK(box.lower[1] == -2.0);
  CHECK(box.upper[1] == 2.0);

  Scenario aux = a;
  aux.auxiliary.enabled = true;
  const auto sets = constraint_sets(aux);
  for (const auto& set : sets) CHECK(set.size() == 2);
  CHECK(default_c_aux(a) == doctest::Approx(900.0));
}

TEST_CASE("restriction to one cluster renumbers agents") {
  const Scenario ex = builtin_case("Example1");
  const Scenario sub = restrict_to_cluster(ex, {5, 6});
  CHECK(sub.agents == 2);
  CHECK(sub.communication == std::vector<std::pair<int, int>>{{0, 1}});
  CHECK_NOTHROW(compile(sub));
}

TEST_CASE("shipped scenario files match the built-in cases") {
  for (const char* name : {"A", "B", "C", "D", "E"}) {
    const std::string file = std::string(SCENARIO_DIR) + "/case_" + static_cast<char>(name[0] - 'A' + 'a') + ".json";
    CAPTURE(file);
    CHECK(load_scenario(file) == builtin_case(name));
  }
}
