#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symtensor/pencil.hpp"

using namespace symt;

namespace {

RationalExpr var(const std::string& n) { return RationalExpr::variable(n); }
RationalExpr q(long n, long d = 1) { return RationalExpr::constant(make_rational(n, d)); }

// dihedral-order-6 orbit pushforward and its flat partner, raw scaling
MetricPair dihedral3_pair() {
  Chart chart("orbit", {"t1", "t2"});
  RationalExpr t1 = var("t1"), t2 = var("t2");
  Matrix gup = {{q(9) * t2 * t2, q(6) * t1}, {q(6) * t1, q(4) * t2}};
  Matrix gtup = {{q(0), q(6)}, {q(6), q(0)}};
  return MetricPair(MetricField(chart, Variance::contravariant, gup),
                    MetricField(chart, Variance::contravariant, gtup));
}

MetricPair remark_pair() {
  Chart chart("remark", {"x", "y"});
  RationalExpr x = var("x"), y = var("y"), f = q(1) + var("x");
  Matrix hup = {{q(0), x}, {x, y}};
  Matrix htup = {{q(0), f}, {f, f}};
  return MetricPair(MetricField(chart, Variance::contravariant, hup),
                    MetricField(chart, Variance::contravariant, htup));
}

}  // namespace

TEST_CASE("equal metrics produce the zero product") {
  Chart chart("flat", {"x", "y"});
  Matrix id = {{q(1), q(0)}, {q(0), q(1)}};
  MetricField g(chart, Variance::contravariant, id);
  MetricPair p(g, g);
  auto t = circ_multiplication(p);
  for (auto& a : t.c)
    for (auto& b : a)
      for (auto& e : b) CHECK(e.is_zero());
}

TEST_CASE("two distinct constant metrics produce the zero product") {
  Chart chart("flat", {"x", "y"});
  Matrix id = {{q(1), q(0)}, {q(0), q(1)}};
  Matrix anti = {{q(0), q(1)}, {q(1), q(0)}};
  MetricPair p(MetricField(chart, Variance::contravariant, id),
               MetricField(chart, Variance::contravariant, anti));
  auto t = circ_multiplication(p);
  for (auto& a : t.c)
    for (auto& b : a)
      for (auto& e : b) CHECK(e.is_zero());
}

TEST_CASE("nijenhuis tensor vanishes for the identity and detects twists") {
  Chart chart("plane", {"x", "y"});
  EndomorphismField id{chart, {{q(1), q(0)}, {q(0), q(1)}}};
  auto n = nijenhuis(id);
  for (auto& a : n)
    for (auto& b : a)
      for (auto& e : b) CHECK(e.is_zero());

  EndomorphismField tw{chart, {{q(0), var("x")}, {q(1), q(0)}}};
  auto m = nijenhuis(tw);
  bool nonzero = false;
  for (auto& a : m)
    for (auto& b : a)
      for (auto& e : b) nonzero = nonzero || !e.is_zero();
  CHECK(nonzero);
}

TEST_CASE("orbit-space pair is an almost compatible, compatible, flat pencil") {
  MetricPair p = dihedral3_pair();
  Report ac = is_almost_compatible(p);
  CHECK(ac.all_passed());
  Report aux = check_auxiliary_identities(p);
  CHECK(aux.all_passed());
  Report comp = is_compatible(p);
  CHECK(comp.all_passed());
  Report flat = is_flat_pencil(p);
  CHECK(flat.all_passed());
  Report lem = lemma_exchange_symmetry(p);
  CHECK(lem.all_passed());
}

TEST_CASE("perturbing one metric entry breaks almost-compatibility") {
  Chart chart("orbit", {"t1", "t2"});
  RationalExpr t1 = var("t1"), t2 = var("t2");
  Matrix gup = {{q(9) * t2 * t2, q(6) * t1}, {q(6) * t1, q(4) * t2}};
  Matrix gtup = {{var("t1"), q(6)}, {q(6), q(0)}};
  MetricPair p(MetricField(chart, Variance::contravariant, gup),
               MetricField(chart, Variance::contravariant, gtup));
  Report ac = is_almost_compatible(p);
  CHECK(!ac.all_passed());
  // the Nijenhuis route and the pencil-connection route agree on failure
  CHECK(ac.find("pencil/almost-compatible/routes-agree")->status == CheckStatus::pass);
  // downstream checks gate on the precondition instead of asserting
  Report aux = check_auxiliary_identities(p);
  for (const auto& c : aux.checks) CHECK(c.status == CheckStatus::skipped);
  Report comp = is_compatible(p);
  for (const auto& c : comp.checks) CHECK(c.status == CheckStatus::skipped);
}

TEST_CASE("conformally flat pair: almost compatible but not compatible") {
  Chart chart("plane", {"x", "y"});
  RationalExpr f = q(1) + var("x") * var("y");
  Matrix id = {{q(1), q(0)}, {q(0), q(1)}};
  Matrix fid = {{f, q(0)}, {q(0), f}};
  MetricPair p(MetricField(chart, Variance::contravariant, id),
               MetricField(chart, Variance::contravariant, fid));
  Report ac = is_almost_compatible(p);
  CHECK(ac.all_passed());
  Report comp = is_compatible(p);
  CHECK(!comp.all_passed());
  CHECK(comp.find("pencil/compatible/routes-agree")->status == CheckStatus::pass);
  // failures must carry a witness component
  for (const auto& c : comp.checks)
    if (c.status == CheckStatus::fail && c.name != "pencil/compatible/routes-agree")
      CHECK(!c.witness.empty());
}

TEST_CASE("product induced by the counterexample pair") {
  MetricPair p = remark_pair();
  Chart chart = p.chart();
  VectorField E{chart, {var("x"), var("y")}};
  BulletResult b = bullet_from_pencil(p, E);
  CHECK(b.checks.all_passed());
  CHECK(b.regular);

  // dx * dx = 0, dx * dy = dx, dy * dy = dy
  for (std::size_t m = 0; m < 2; ++m) CHECK(b.cotangent.c[0][0][m].is_zero());
  CHECK(b.cotangent.c[0][1][0] == q(1));
  CHECK(b.cotangent.c[0][1][1].is_zero());
  CHECK(b.cotangent.c[1][1][0].is_zero());
  CHECK(b.cotangent.c[1][1][1] == q(1));

  // E rescales the tangent product by a nonconstant factor 1 - x/(1+x)
  auto f = table_rescaling_factor(E, b.tangent);
  REQUIRE(f.has_value());
  CHECK(*f == q(1) - var("x") / (q(1) + var("x")));
  CHECK(!expr_is_chart_constant(*f, chart));
}

TEST_CASE("bullet checks pass on the orbit-space pencil") {
  MetricPair p = dihedral3_pair();
  VectorField E{p.chart(), {q(3) * var("t1"), q(2) * var("t2")}};
  BulletResult b = bullet_from_pencil(p, E);
  CHECK(b.checks.all_passed());
  auto f = table_rescaling_factor(E, b.tangent);
  REQUIRE(f.has_value());
  CHECK(expr_is_chart_constant(*f, p.chart()));
}

TEST_CASE("degenerate product endomorphism is rejected") {
  Chart chart("flat", {"x", "y"});
  Matrix id = {{q(1), q(0)}, {q(0), q(1)}};
  MetricField g(chart, Variance::contravariant, id);
  MetricPair p(g, g);
  VectorField E{chart, {var("x"), var("y")}};
  CHECK_THROWS_AS(bullet_from_pencil(p, E), SingularT);
}
