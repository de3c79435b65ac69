#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "symtensor/crosscheck.hpp"
#include "symtensor/jet.hpp"
#include "symtensor/tensor.hpp"

using namespace symt;

namespace {

RationalExpr var(const std::string& n) { return RationalExpr::variable(n); }
RationalExpr q(long n, long d = 1) { return RationalExpr::constant(Rational(n, d)); }

JetPoint point1(const std::string& v, long x) {
  JetPoint p;
  p.variables = {v};
  p.values = {Rational(x)};
  return p;
}

// samples for an opaque symbol backed by a concrete polynomial model:
// every derivative of `model` up to total order `maxord` above base indices,
// evaluated at the argument values.
FunctionSamples samples_from_model(const std::string& name, const RationalExpr& model,
                                   const std::vector<std::string>& formal,
                                   const std::vector<Rational>& arg_values, int maxord) {
  FunctionSamples out;
  JetPoint argpt;
  argpt.variables = formal;
  argpt.values = arg_values;
  std::vector<std::vector<std::uint32_t>> frontier = {
      std::vector<std::uint32_t>(formal.size(), 0)};
  std::map<std::vector<std::uint32_t>, RationalExpr> exprs;
  exprs[frontier[0]] = model;
  for (int ord = 0; ord <= maxord; ++ord) {
    std::vector<std::vector<std::uint32_t>> next;
    for (const auto& idx : frontier) {
      out[SampleKey{name, idx}] = evaluate(exprs[idx], argpt);
      for (std::size_t s = 0; s < formal.size(); ++s) {
        auto bumped = idx;
        bumped[s] += 1;
        if (!exprs.count(bumped)) {
          exprs[bumped] = exprs[idx].derivative(formal[s]);
          next.push_back(bumped);
        }
      }
    }
    frontier = next;
  }
  return out;
}

}  // namespace

TEST_CASE("jet of a square") {
  Jet2 j = jet_eval(parse_expr("x^2"), point1("x", 3));
  CHECK(j.value == 9);
  CHECK(j.grad[0] == 6);
  CHECK(j.hess[0][0] == 2);
}

TEST_CASE("pole detection") {
  CHECK_THROWS_AS(jet_eval(parse_expr("(x - 1)^-1"), point1("x", 1)), PoleAtPoint);
}

TEST_CASE("jet arithmetic matches symbolic differentiation") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<long> C(-5, 5);
  for (int iter = 0; iter < 30; ++iter) {
    RationalExpr x = var("x"), y = var("y");
    RationalExpr e = q(C(rng)) * x * x * y + q(C(rng)) * y + q(C(rng));
    RationalExpr d = x * y + q(7);
    RationalExpr expr = e / d;
    JetPoint p;
    p.variables = {"x", "y"};
    p.values = {make_rational(C(rng), 3), make_rational(C(rng), 2)};
    Jet2 j = jet_eval(expr, p);
    CHECK(j.value == evaluate(expr, p));
    for (int i = 0; i < 2; ++i) {
      RationalExpr di = expr.derivative(p.variables[i]);
      CHECK(j.grad[i] == evaluate(di, p));
      for (int k = 0; k < 2; ++k)
        CHECK(j.hess[i][k] == evaluate(di.derivative(p.variables[k]), p));
    }
  }
}

TEST_CASE("second-order chain rule through opaque symbols") {
  // f is opaque to the evaluator; its samples come from a concrete model
  RationalExpr model = parse_expr("u^3*w + u*w^2");
  RationalExpr inner1 = parse_expr("x^2 + y");
  RationalExpr inner2 = parse_expr("x*y");
  FunctionAtom a;
  a.name = "f";
  a.args = {inner1, inner2};
  a.index = {0, 0};
  RationalExpr opaque = RationalExpr::atom(a) * var("x") + q(2);
  RationalExpr transparent =
      model.substitute({{"u", inner1}, {"w", inner2}}) * var("x") + q(2);

  JetPoint p;
  p.variables = {"x", "y"};
  p.values = {make_rational(2), make_rational(1, 3)};
  JetPoint argpt;
  Rational a1 = evaluate(inner1, p), a2 = evaluate(inner2, p);
  p.samples = samples_from_model("f", model, {"u", "w"}, {a1, a2}, 2);

  Jet2 jo = jet_eval(opaque, p);
  Jet2 jt = jet_eval(transparent, p);
  CHECK(jo.value == jt.value);
  for (int i = 0; i < 2; ++i) {
    CHECK(jo.grad[i] == jt.grad[i]);
    for (int j = 0; j < 2; ++j) CHECK(jo.hess[i][j] == jt.hess[i][j]);
  }
}

TEST_CASE("missing function samples are reported") {
  FunctionAtom a;
  a.name = "f";
  a.args = {var("x")};
  a.index = {0};
  JetPoint p = point1("x", 2);
  CHECK_THROWS_AS(jet_eval(RationalExpr::atom(a), p), MissingFunctionSample);
}

TEST_CASE("oracle curvature of the Euclidean metric vanishes") {
  Chart chart("plane", {"x", "y"});
  Matrix id = {{q(1), q(0)}, {q(0), q(1)}};
  JetPoint p;
  p.variables = {"x", "y"};
  p.values = {Rational(5), Rational(-3)};
  CurvaturePoint c = oracle_curvature(id, 2, p);
  for (auto& a : c.gamma)
    for (auto& b : a)
      for (auto& v : b) CHECK(v == 0);
  for (auto& a : c.riemann)
    for (auto& b : a)
      for (auto& r : b)
        for (auto& v : r) CHECK(v == 0);
}

TEST_CASE("oracle reproduces constant curvature of the round conformal metric") {
  // (c (x^2 + y^2) + d)^-2 * delta with c = d = 1 at (1, 2): lowered curvature
  // must satisfy R_1212 = 4 (g11 g22 - g12^2)
  RationalExpr conf = parse_expr("(x^2 + y^2 + 1)^-2");
  Matrix g = {{conf, RationalExpr()}, {RationalExpr(), conf}};
  JetPoint p;
  p.variables = {"x", "y"};
  p.values = {Rational(1), Rational(2)};
  CurvaturePoint c = oracle_curvature(g, 2, p);
  Rational g11 = evaluate(conf, p);
  Rational expected = Rational(4) * (g11 * g11);
  CHECK(c.lowered[0][1][0][1] == expected);
}

TEST_CASE("symbolic and oracle curvature agree on a curved metric") {
  Chart chart("plane", {"x", "y"});
  RationalExpr c = var("c"), d = var("d");
  RationalExpr conf = (c * (var("x") * var("x") + var("y") * var("y")) + d).pow(-2);
  Matrix m = {{conf, RationalExpr()}, {RationalExpr(), conf}};
  MetricField g(chart, Variance::covariant, m);
  Report rep = jet_symbolic_crosscheck(g, 20, 1234);
  CHECK(rep.all_passed());
}
