#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symtensor/frobenius.hpp"
#include "symtensor/saito.hpp"

using namespace symt;

namespace {

RationalExpr var(const std::string& n) { return RationalExpr::variable(n); }
RationalExpr q(long n, long d = 1) { return RationalExpr::constant(make_rational(n, d)); }

}  // namespace

TEST_CASE("dihedral invariants expand with exact binomial coefficients") {
  CoxeterDatum cd = catalog_entry("I2(5)");
  RationalExpr x = var("x"), y = var("y");
  RationalExpr expect = x.pow(5) - q(10) * x.pow(3) * y * y + q(5) * x * y.pow(4);
  CHECK(RationalExpr::from_polynomial(cd.invariants[0]) == expect);
  CHECK(cd.degrees == std::vector<long>{5, 2});
}

TEST_CASE("degree duality holds for every catalog entry") {
  for (const auto& name : {"I2(3)", "I2(4)", "I2(5)", "A2", "A3", "B2"}) {
    CoxeterDatum cd = catalog_entry(name);
    std::size_t n = cd.rank;
    for (std::size_t i = 0; i < n; ++i)
      CHECK(cd.degrees[i] + cd.degrees[n - 1 - i] == cd.degrees[0] + 2);
    // last invariant is the quadratic
    Polynomial sq;
    for (const auto& c : cd.xchart.coords) {
      Polynomial v = Polynomial::variable(c);
      sq = sq + v * v;
    }
    CHECK(Polynomial::compare(cd.invariants.back(), sq) == 0);
  }
}

TEST_CASE("unknown groups are rejected") {
  CHECK_THROWS_AS(catalog_entry("H3"), UnknownSymbol);
  CHECK_THROWS_AS(catalog_entry("I2(x)"), Error);
}

TEST_CASE("pushforward of the dihedral pencil matches the closed form") {
  for (long m : {3L, 4L, 5L}) {
    CoxeterDatum cd = catalog_entry("I2(" + std::to_string(m) + ")");
    MetricField g = pushforward_metric(cd);
    RationalExpr t1 = var("t1"), t2 = var("t2");
    CHECK(g.at(0, 0) == q(m * m) * t2.pow(static_cast<long>(m - 1)));
    CHECK(g.at(0, 1) == q(2 * m) * t1);
    CHECK(g.at(1, 1) == q(4) * t2);
  }
}

TEST_CASE("the quadratic invariant always contributes 4 t^n") {
  CoxeterDatum cd = catalog_entry("A3");
  MetricField g = pushforward_metric(cd);
  CHECK(g.at(2, 2) == q(4) * var("t3"));
}

TEST_CASE("A2 and its dihedral alias produce the same pushforward") {
  MetricField a = pushforward_metric(catalog_entry("A2"));
  MetricField b = pushforward_metric(catalog_entry("I2(3)"));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(a.at(i, j) == b.at(i, j));
}

TEST_CASE("rewrite failure signals a bad invariant basis") {
  CoxeterDatum cd = catalog_entry("I2(3)");
  // x alone is not invariant, so it cannot be rewritten
  Polynomial bad = Polynomial::variable("x");
  Chart tchart("orbit", {"t1", "t2"});
  CHECK_THROWS_AS(rewrite_in_invariants(cd, bad, tchart), RewriteFailed);
}

TEST_CASE("orbit pencil normalizes to the unit anti-diagonal partner") {
  for (const auto& name : {"I2(3)", "I2(4)", "B2"}) {
    SaitoPencilResult sp = saito_pencil(catalog_entry(name));
    CHECK(sp.checks.all_passed());
    std::size_t n = sp.tchart.dim();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        CHECK(sp.gt.at(i, j) == (i + j + 2 == n + 1 ? q(1) : RationalExpr()));
  }
}

TEST_CASE("rank-three orbit pencil is flat") {
  SaitoPencilResult sp = saito_pencil(catalog_entry("A3"));
  CHECK(sp.checks.all_passed());
}

TEST_CASE("modified pencil carries curvature 4cd and a flat partner") {
  ModifiedSaitoResult ms = modified_saito(catalog_entry("I2(3)"), var("c"), var("d"));
  CHECK(ms.checks.all_passed());
}

TEST_CASE("constant scaling reduces to the flat pencil") {
  ModifiedSaitoResult ms = modified_saito(catalog_entry("I2(3)"), q(0), q(1));
  CHECK(ms.checks.all_passed());
  Report flat = is_flat_pencil(ms.pencil.scaled);
  CHECK(flat.all_passed());
  Report locus = regularity_locus(ms);
  CHECK(locus.all_passed());
}

TEST_CASE("regularity locus factors into the two excluded lines") {
  ModifiedSaitoResult ms = modified_saito(catalog_entry("I2(4)"), var("c"), var("d"));
  Report rep = regularity_locus(ms);
  CHECK(rep.all_passed());
  const CheckResult* fac = rep.find("modified-saito/regularity-locus-factorization");
  REQUIRE(fac != nullptr);
  CHECK(fac->note.find("L1") != std::string::npos);
}

TEST_CASE("flat coordinate change verifies the pullback identity") {
  RationalExpr b = var("b"), c = var("c"), d = var("d");
  RationalExpr a = (q(1) + b * c) / d;
  for (std::size_t n : {2, 3}) {
    FlatCoordinateResult fc = modified_flat_coordinates(n, a, b, c, d);
    CHECK(fc.checks.all_passed());
  }
  SUBCASE("identity map") {
    FlatCoordinateResult fc = modified_flat_coordinates(3, q(1), q(0), q(0), q(1));
    CHECK(fc.checks.all_passed());
    CHECK(fc.map.at("t1") == var("t1"));
    CHECK(fc.map.at("t2") == var("t2"));
    CHECK(fc.map.at("t3") == var("t3"));
  }
  SUBCASE("determinant is enforced") {
    CHECK_THROWS_AS(modified_flat_coordinates(3, q(2), q(0), q(0), q(1)), DeterminantNotOne);
  }
}

TEST_CASE("orbit prepotential solves the associativity equations") {
  SaitoPencilResult sp = saito_pencil(catalog_entry("I2(3)"));
  Prepotential p = saito_prepotential(sp);
  CHECK(check_wdvv(p).all_passed());
  FrobeniusStructure s = frobenius_from_prepotential(p);
  CHECK(s.checks.all_passed());
  // the intersection form reproduces the pencil metric up to the recorded
  // normalization constant: the pencil unit field is mu * d/dt1, and the
  // prepotential frame rescales the product by mu
  IntersectionResult ir = intersection_form(s);
  CHECK(ir.checks.all_passed());
  auto unit = table_identity(s.tangent);
  REQUIRE(unit.has_value());
  auto pencil_unit = lower(sp.g, sp.euler);  // g(E) = w * dt^n
  RationalExpr mu = pencil_unit.comp[1];
  RationalExpr nu = mu * mu;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(ir.g.at(i, j) == nu * sp.g.at(i, j));
}

TEST_CASE("catalog entries parse from data files") {
  std::string text = R"(
name = G2
degrees = 6 2
coords = x y
invariant = x^6 - 15*x^4*y^2 + 15*x^2*y^4 - y^6
invariant = x^2 + y^2
)";
  CoxeterDatum cd = parse_coxeter_datum(text);
  CHECK(cd.name == "G2");
  CHECK(cd.rank == 2);
  SaitoPencilResult sp = saito_pencil(cd);
  CHECK(sp.checks.all_passed());
}
