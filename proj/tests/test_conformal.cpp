#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symtensor/conformal.hpp"
#include "symtensor/saito.hpp"

using namespace symt;

namespace {

RationalExpr var(const std::string& n) { return RationalExpr::variable(n); }
RationalExpr q(long n, long d = 1) { return RationalExpr::constant(make_rational(n, d)); }

SaitoPencilResult& dihedral3() {
  static SaitoPencilResult sp = saito_pencil(catalog_entry("I2(3)"));
  return sp;
}

ScaledPencil scaled_by(const RationalExpr& omega) {
  SaitoPencilResult& sp = dihedral3();
  return make_scaled_pencil(MetricPair(sp.g, sp.gt), omega, sp.euler);
}

RationalExpr reciprocal_omega() {
  SaitoPencilResult& sp = dihedral3();
  RationalExpr q2 = var("t2") / RationalExpr::constant(sp.scaling[1]);
  return (var("c") * q2 + var("d")).pow(-1);
}

}  // namespace

TEST_CASE("weak quasi-homogeneity holds for the reciprocal factor") {
  Report rep = weak_quasihomogeneous_check(scaled_by(reciprocal_omega()));
  CHECK(rep.all_passed());
  const CheckResult* diff = rep.find("weak-qh/difference-constant");
  REQUIRE(diff != nullptr);
  CHECK(diff->status == CheckStatus::pass);
}

TEST_CASE("trivial factor reduces to the plain quasi-homogeneity relations") {
  Report rep = weak_quasihomogeneous_check(scaled_by(q(1)));
  CHECK(rep.all_passed());
}

TEST_CASE("a factor depending on the wrong coordinate breaks the endomorphism condition") {
  Report rep = weak_quasihomogeneous_check(scaled_by(var("t1")));
  CHECK(!rep.all_passed());
  const CheckResult* nab = rep.find("weak-qh/nabla-euler-proportional");
  REQUIRE(nab != nullptr);
  CHECK(nab->status == CheckStatus::fail);
}

TEST_CASE("Euler rescaling factor equals the difference of the metric factors") {
  SUBCASE("reciprocal factor: constant difference") {
    Report rep = euler_multiplication_rescaling_check(scaled_by(reciprocal_omega()));
    CHECK(rep.all_passed());
  }
  SUBCASE("constant factor") {
    Report rep = euler_multiplication_rescaling_check(scaled_by(q(3)));
    CHECK(rep.all_passed());
  }
}

TEST_CASE("dimension-two counterexample keeps a nonconstant rescaling factor") {
  Chart chart("remark", {"x", "y"});
  RationalExpr x = var("x"), f = q(1) + var("x");
  Matrix hup = {{q(0), x}, {x, var("y")}};
  Matrix htup = {{q(0), f}, {f, f}};
  MetricPair pair(MetricField(chart, Variance::contravariant, hup),
                  MetricField(chart, Variance::contravariant, htup));
  VectorField e{chart, {var("x"), var("y")}};
  ScaledPencil sp = make_scaled_pencil(pair, q(1), e);
  Report rep = euler_multiplication_rescaling_check(sp);
  CHECK(rep.all_passed());
  const CheckResult* k = rep.find("euler-rescaling/multiplication-factor");
  REQUIRE(k != nullptr);
  CHECK(k->note.find("nonconstant") != std::string::npos);
}

TEST_CASE("scaled and base products coincide on the tangent space") {
  SUBCASE("reciprocal factor") {
    Report rep = scaled_multiplication_agreement_check(scaled_by(reciprocal_omega()));
    CHECK(rep.all_passed());
  }
  SUBCASE("trivial factor") {
    Report rep = scaled_multiplication_agreement_check(scaled_by(q(1)));
    CHECK(rep.all_passed());
  }
  SUBCASE("polynomial factor aligned with the Euler form") {
    Report rep = scaled_multiplication_agreement_check(scaled_by(q(1) + var("t2") * var("t2")));
    CHECK(rep.all_passed());
  }
}

TEST_CASE("equivalence of the four statements") {
  SUBCASE("reciprocal factor: all true") {
    Report rep = weak_f_equivalence_check(scaled_by(reciprocal_omega()));
    CHECK(rep.all_passed());
    CHECK(rep.find("equivalence/weak-quasi-homogeneous")->note == "true");
    CHECK(rep.find("equivalence/f-manifold")->note == "true");
  }
  SUBCASE("trivial factor: all true") {
    Report rep = weak_f_equivalence_check(scaled_by(q(1)));
    CHECK(rep.all_passed());
  }
  SUBCASE("factor along the wrong coordinate: all false") {
    Report rep = weak_f_equivalence_check(scaled_by(q(1) + var("t1")));
    CHECK(rep.all_passed());
    CHECK(rep.find("equivalence/weak-quasi-homogeneous")->note == "false");
    CHECK(rep.find("equivalence/euler-form-wedge-dW-zero")->note.substr(0, 5) == "false");
    CHECK(rep.find("equivalence/weak-f-manifold")->note == "false");
  }
}

TEST_CASE("scaling factor identities") {
  SUBCASE("reciprocal factor") {
    Report rep = scaled_factor_identities(scaled_by(reciprocal_omega()));
    CHECK(rep.all_passed());
  }
  SUBCASE("polynomial factor") {
    Report rep = scaled_factor_identities(scaled_by(q(1) + var("t2") * var("t2")));
    CHECK(rep.all_passed());
  }
}
