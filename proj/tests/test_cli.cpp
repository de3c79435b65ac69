#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symtensor/scenario.hpp"

using namespace symt;

namespace {

const char* kPencilScenario = R"(
[scenario]
kind = pencil-check
name = dihedral-raw

[chart]
coords = t1 t2

[bindings]
g[1,1] = 9*t2^2
g[1,2] = 6*t1
g[2,2] = 4*t2
g_variance = contravariant
gt[1,2] = 6
gt_variance = contravariant
E = 3*t1, 2*t2
)";

}  // namespace

TEST_CASE("scenario files parse") {
  Scenario s = parse_scenario(kPencilScenario);
  CHECK(s.kind == "pencil-check");
  CHECK(s.name == "dihedral-raw");
  CHECK(s.coords == std::vector<std::string>{"t1", "t2"});
  CHECK(s.get("g[1,1]").value() == "9*t2^2");
  CHECK(!s.get("missing").has_value());
}

TEST_CASE("scenario validation") {
  CHECK_THROWS_AS(parse_scenario("name = x\n"), ScenarioError);                 // no kind
  CHECK_THROWS_AS(run_scenario(parse_scenario("kind = bogus\n"), 1), ScenarioError);
  // undeclared variable in an expression
  Scenario s = parse_scenario(kPencilScenario);
  for (auto& [k, v] : s.bindings)
    if (k == "E") v = "3*t1, 2*z";
  CHECK_THROWS_AS(run_scenario(s, 1), UnknownVariable);
  // reserved pencil parameter
  Scenario s2 = parse_scenario(kPencilScenario);
  for (auto& [k, v] : s2.bindings)
    if (k == "g[1,1]") v = "lambda";
  s2.symbols.push_back("lambda");
  CHECK_THROWS_AS(run_scenario(s2, 1), ScenarioError);
}

TEST_CASE("pencil scenario runs green with a deterministic report") {
  Scenario s = parse_scenario(kPencilScenario);
  ScenarioOutcome a = run_scenario(s, 7);
  CHECK(a.report.all_passed());
  ScenarioOutcome b = run_scenario(s, 7);
  CHECK(render_json(a) == render_json(b));
  ScenarioOutcome c = run_scenario(s, 8);
  CHECK(render_json(a) != render_json(c));  // the seed is part of the report
}

TEST_CASE("identity filter") {
  Scenario s = parse_scenario(kPencilScenario);
  ScenarioOutcome o = run_scenario(s, 7, std::string("pencil/flat/lambda-curvature-vanishes"));
  CHECK(o.report.checks.size() == 1);
  CHECK(o.report.checks[0].status == CheckStatus::pass);
  CHECK_THROWS_AS(run_scenario(s, 7, std::string("no-such-identity")), ScenarioError);
}

TEST_CASE("negative control fails with a witness") {
  Scenario s = parse_scenario(R"(
kind = pencil-check
name = perturbed
coords = t1 t2
g[1,1] = 9*t2^2
g[1,2] = 6*t1
g[2,2] = 4*t2
g_variance = contravariant
gt[1,1] = t1
gt[1,2] = 6
gt_variance = contravariant
)");
  ScenarioOutcome o = run_scenario(s, 7);
  CHECK(!o.report.all_passed());
  bool witness_seen = false;
  for (const auto& c : o.report.checks)
    if (c.status == CheckStatus::fail && !c.witness.empty()) witness_seen = true;
  CHECK(witness_seen);
  CHECK(render_human(o).find("verdict: FAIL") != std::string::npos);
}

TEST_CASE("wdvv scenario with a rewrite rule") {
  Scenario s = parse_scenario(R"(
kind = wdvv
name = opaque-tail
coords = t1 t2 t3
rule = D[f,2,2,2](t2,t3) -> D[f,1,1,2](t2,t3)^2 - D[f,1,2,2](t2,t3)*D[f,1,1,1](t2,t3)
F = 1/2*t1^2*t3 + 1/2*t1*t2^2 + f(t2,t3)
)");
  ScenarioOutcome o = run_scenario(s, 7);
  CHECK(o.report.all_passed());
}

TEST_CASE("sl2 scenario prints the transformed solution") {
  Scenario s = parse_scenario(R"(
kind = sl2
name = quick
coords = t1 t2 t3
rule = D[f,2,2,2](t2,t3) -> D[f,1,1,2](t2,t3)^2 - D[f,1,2,2](t2,t3)*D[f,1,1,1](t2,t3)
F = 1/2*t1^2*t3 + 1/2*t1*t2^2 + f(t2,t3)
a = 1
b = 0
c = 1
d = 1
)");
  ScenarioOutcome o = run_scenario(s, 7);
  CHECK(o.report.all_passed());
  REQUIRE(!o.printed.empty());
  CHECK(o.printed[0].find("transformed F = ") == 0);
  CHECK(o.printed[0].find("f(") != std::string::npos);
}

TEST_CASE("bundled scenarios are present") {
  const auto& bundle = bundled_scenarios();
  CHECK(bundle.size() >= 10);
  bool found = false;
  for (const auto& b : bundle)
    if (std::string(b.name) == "modified-saito-I2-3") found = true;
  CHECK(found);
  // every bundled scenario at least parses
  for (const auto& b : bundle) CHECK(parse_scenario(b.text).kind.size() > 0);
}

TEST_CASE("modified-saito scenario reports the curvature value") {
  Scenario s = parse_scenario(R"(
kind = modified-saito
name = quick-mod
symbols = c d
group = I2(3)
c = c
d = d
)");
  ScenarioOutcome o = run_scenario(s, 7);
  CHECK(o.report.all_passed());
  bool saw = false;
  for (const auto& p : o.printed)
    if (p.find("sectional curvature = 4*c*d") != std::string::npos) saw = true;
  CHECK(saw);
}
