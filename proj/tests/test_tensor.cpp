#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symtensor/crosscheck.hpp"
#include "symtensor/tensor.hpp"

using namespace symt;

namespace {

RationalExpr var(const std::string& n) { return RationalExpr::variable(n); }
RationalExpr q(long n, long d = 1) { return RationalExpr::constant(Rational(n, d)); }

MetricField euclidean(const Chart& chart) {
  std::size_t n = chart.dim();
  Matrix m(n, std::vector<RationalExpr>(n));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = q(1);
  return MetricField(chart, Variance::covariant, m);
}

// (c (sum x_i^2) + d)^-2 * delta on an n-dimensional chart, c and d symbolic
MetricField round_metric(const Chart& chart) {
  RationalExpr sum;
  for (const auto& c : chart.coords) sum += var(c) * var(c);
  RationalExpr conf = (var("c") * sum + var("d")).pow(-2);
  std::size_t n = chart.dim();
  Matrix m(n, std::vector<RationalExpr>(n));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = conf;
  return MetricField(chart, Variance::covariant, m);
}

bool connection_is_metric(const MetricField& g, const ConnectionField& c) {
  const Chart& chart = g.chart();
  std::size_t n = chart.dim();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        RationalExpr nab = g.at(j, k).derivative(chart.coords[i]);
        for (std::size_t m = 0; m < n; ++m)
          nab -= c.gamma[m][i][j] * g.at(m, k) + c.gamma[m][i][k] * g.at(j, m);
        if (!nab.is_zero()) return false;
      }
  return true;
}

}  // namespace

TEST_CASE("Euclidean Christoffels vanish in any dimension") {
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
    Chart chart("flat", names);
    ConnectionField c = christoffel(euclidean(chart));
    for (const auto& mk : c.gamma)
      for (const auto& row : mk)
        for (const auto& e : row) CHECK(e.is_zero());
  }
}

TEST_CASE("polar-style metric diag(1, x1^2)") {
  Chart chart("polar", {"x1", "x2"});
  Matrix m = {{q(1), q(0)}, {q(0), var("x1") * var("x1")}};
  MetricField g(chart, Variance::covariant, m);
  ConnectionField c = christoffel(g);
  CHECK(c.gamma[0][1][1] == -var("x1"));
  CHECK(c.gamma[1][0][1] == q(1) / var("x1"));
  CHECK(c.gamma[1][1][0] == q(1) / var("x1"));
  CHECK(c.gamma[0][0][0].is_zero());
  CHECK(c.gamma[0][0][1].is_zero());
  CHECK(c.gamma[1][0][0].is_zero());
  CHECK(c.gamma[1][1][1].is_zero());
  CHECK(connection_is_metric(g, c));
  // flat plane in disguise
  CHECK(riemann(c).is_zero());
}

TEST_CASE("round conformal metric has constant curvature 4cd") {
  for (std::size_t n = 2; n <= 4; ++n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
    Chart chart("round", names);
    MetricField g = round_metric(chart);
    auto s = constant_sectional_curvature(g);
    REQUIRE(s.has_value());
    CHECK(*s == q(4) * var("c") * var("d"));
  }
}

TEST_CASE("Euclidean metric is flat and diag(1, x1^3) has no constant shape") {
  Chart chart("flat", {"x1", "x2"});
  auto s = constant_sectional_curvature(euclidean(chart));
  REQUIRE(s.has_value());
  CHECK(s->is_zero());

  Matrix m = {{q(1), q(0)}, {q(0), var("x1") * var("x1") * var("x1")}};
  MetricField odd(chart, Variance::covariant, m);
  CHECK(!constant_sectional_curvature(odd).has_value());
}

TEST_CASE("metric property and torsion-freeness hold for curved metrics") {
  Chart chart("round", {"x1", "x2", "x3"});
  MetricField g = round_metric(chart);
  ConnectionField c = christoffel(g);
  CHECK(connection_is_metric(g, c));
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) CHECK(c.gamma[k][i][j] == c.gamma[k][j][i]);
}

TEST_CASE("curvature antisymmetry and first Bianchi identity") {
  Chart chart("round", {"x1", "x2", "x3"});
  CurvatureField r = riemann(christoffel(round_metric(chart)));
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          CHECK(r.r[l][k][i][j] == -r.r[l][k][j][i]);
          CHECK((r.r[l][k][i][j] + r.r[l][i][j][k] + r.r[l][j][k][i]).is_zero());
        }
}

TEST_CASE("lowered curvature pair symmetry") {
  Chart chart("round", {"x1", "x2"});
  MetricField g = round_metric(chart);
  auto low = lower_curvature(g, riemann(christoffel(g)));
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(low[l][k][i][j] == low[i][j][l][k]);
}

TEST_CASE("Euler field rescales an anti-diagonal constant metric by the degree sum") {
  // degrees 3, 2 in dimension two: factor d1 + 2 = 5
  Chart chart("saito", {"t1", "t2"});
  Matrix m = {{q(0), q(1)}, {q(1), q(0)}};
  MetricField gt(chart, Variance::covariant, m);
  VectorField E{chart, {q(3) * var("t1"), q(2) * var("t2")}};
  auto p = conformal_factor(E, gt);
  REQUIRE(p.has_value());
  CHECK(*p == q(5));
}

TEST_CASE("two-dimensional counterexample pair rescales as displayed") {
  Chart chart("remark", {"x", "y"});
  RationalExpr x = var("x"), y = var("y");
  // h* = x (dx ox dy + dy ox dx) + y dy ox dy, given contravariantly
  Matrix hstar = {{q(0), x}, {x, y}};
  MetricField h(chart, Variance::contravariant, hstar);
  VectorField E{chart, {x, y}};
  auto ph = conformal_factor(E, h);
  REQUIRE(ph.has_value());
  CHECK(*ph == q(1));

  // f = 1 + x
  RationalExpr f = q(1) + x;
  Matrix htstar = {{q(0), f}, {f, f}};
  MetricField ht(chart, Variance::contravariant, htstar);
  auto pt = conformal_factor(E, ht);
  REQUIRE(pt.has_value());
  CHECK(*pt == q(2) - x / (q(1) + x));

  // with f opaque the factor is 2 - x f'(x)/f(x)
  FunctionAtom fa;
  fa.name = "f";
  fa.args = {x};
  fa.index = {0};
  RationalExpr fo = RationalExpr::atom(fa);
  FunctionAtom fd = fa;
  fd.index = {1};
  RationalExpr fprime = RationalExpr::atom(fd);
  Matrix hostar = {{q(0), fo}, {fo, fo}};
  MetricField ho(chart, Variance::contravariant, hostar);
  auto po = conformal_factor(E, ho);
  REQUIRE(po.has_value());
  CHECK(*po == q(2) - x * fprime / fo);
}

TEST_CASE("covariant derivative of one-forms") {
  Chart chart("flat", {"x1", "x2"});
  MetricField g = euclidean(chart);
  ConnectionField c = christoffel(g);
  VectorField X{chart, {q(1), q(2)}};
  OneForm alpha{chart, {q(5), q(7)}};
  OneForm r = covariant_derivative_oneform(c, X, alpha);
  CHECK(r.comp[0].is_zero());
  CHECK(r.comp[1].is_zero());
}

TEST_CASE("nabla of a linear Euler field is the degree matrix") {
  Chart chart("saito", {"t1", "t2", "t3"});
  MetricField g = euclidean(chart);
  VectorField E{chart, {q(4) * var("t1"), q(3) * var("t2"), q(2) * var("t3")}};
  Matrix m = nabla_endomorphism(christoffel(g), E);
  CHECK(m[0][0] == q(4));
  CHECK(m[1][1] == q(3));
  CHECK(m[2][2] == q(2));
  CHECK(m[0][1].is_zero());
  CHECK(!proportional_to_identity(m).has_value());
  VectorField E2{chart, {q(2) * var("t1"), q(2) * var("t2"), q(2) * var("t3")}};
  auto f = proportional_to_identity(nabla_endomorphism(christoffel(g), E2));
  REQUIRE(f.has_value());
  CHECK(*f == q(2));
}

TEST_CASE("conformal rescale and the connection difference identities") {
  Chart chart("saito", {"t1", "t2"});
  Matrix gm = {{q(0), q(1)}, {q(1), q(0)}};
  MetricField gt(chart, Variance::covariant, gm);
  Matrix gg = {{var("t2"), q(2) * var("t1")}, {q(2) * var("t1"), q(4)}};
  MetricField g(chart, Variance::covariant, gg);

  SUBCASE("identity factor") {
    Report r = scaled_connection_difference(g, gt, q(1));
    CHECK(r.all_passed());
  }
  SUBCASE("reciprocal factor") {
    RationalExpr omega = (var("c") * var("t2") + var("d")).pow(-1);
    Report r = scaled_connection_difference(g, gt, omega);
    CHECK(r.all_passed());
  }
  SUBCASE("random polynomial factor") {
    RationalExpr omega = q(1) + q(2) * var("t1") + q(3) * var("t2") * var("t2");
    Report r = scaled_connection_difference(g, gt, omega);
    CHECK(r.all_passed());
  }
}

TEST_CASE("Lie derivative of the connection for conformal fields") {
  SUBCASE("constant factor on a constant metric") {
    Chart chart("saito", {"t1", "t2"});
    Matrix gm = {{q(0), q(1)}, {q(1), q(0)}};
    MetricField gt(chart, Variance::covariant, gm);
    VectorField E{chart, {q(3) * var("t1"), q(2) * var("t2")}};
    Report r = lie_derivative_connection(E, gt);
    CHECK(r.all_passed());
  }
  SUBCASE("nonconstant factor") {
    Chart chart("plane", {"x", "y"});
    RationalExpr w = (q(1) + var("x")) * (q(1) + var("x"));
    Matrix gm = {{w, q(0)}, {q(0), w}};
    MetricField g(chart, Variance::covariant, gm);
    VectorField Z{chart, {var("x"), var("y")}};
    Report r = lie_derivative_connection(Z, g);
    CHECK(r.all_passed());
  }
  SUBCASE("non-conformal field is rejected") {
    Chart chart("plane", {"x", "y"});
    MetricField g = euclidean(chart);
    VectorField Z{chart, {var("x") * var("x"), q(0)}};
    CHECK_THROWS_AS(lie_derivative_connection(Z, g), NotConformal);
  }
}

TEST_CASE("jet oracle agrees with symbolic curvature for catalog-style metrics") {
  Chart chart("pencil", {"t1", "t2"});
  Matrix gg = {{q(9) * var("t2") * var("t2"), q(6) * var("t1")},
               {q(6) * var("t1"), q(4) * var("t2")}};
  MetricField g(chart, Variance::contravariant, gg);
  Report r = jet_symbolic_crosscheck(g, 20, 777);
  CHECK(r.all_passed());
}
