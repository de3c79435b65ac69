#pragma once

#include "symtensor/conformal.hpp"
#include "symtensor/pencil.hpp"

namespace symt {

/// A finite reflection group presented through an explicit basis of
/// invariant polynomials on its ambient chart. Invariants are ordered by
/// strictly or weakly decreasing degree; the last one is the sum of squares.
struct CoxeterDatum {
  std::string name;
  std::size_t rank = 0;
  std::vector<long> degrees;           // descending; front() is the Coxeter number
  Chart xchart;
  std::vector<Polynomial> invariants;  // in the ambient coordinates
};

/// Built-in entries: I2(m) for m >= 3 (parametric), A2, A3, B2.
CoxeterDatum catalog_entry(const std::string& name);
std::vector<std::string> catalog_names();

/// Parse one catalog entry from its data-file form (see the scenario format
/// documentation). Users can add groups without recompiling.
CoxeterDatum parse_coxeter_datum(const std::string& text);

/// Rewrite a polynomial in the ambient coordinates as a polynomial in the
/// invariants, matching weighted-homogeneous components against all invariant
/// monomials of the same degree. RewriteFailed when no exact match exists.
RationalExpr rewrite_in_invariants(const CoxeterDatum& cd, const Polynomial& value,
                                   const Chart& tchart);

/// Orbit-map pushforward of the Euclidean ambient metric, expressed in the
/// raw invariant coordinates.
MetricField pushforward_metric(const CoxeterDatum& cd);

struct SaitoPencilResult {
  CoxeterDatum datum;
  Chart tchart;                       // normalized coordinates t1..tn
  std::vector<Rational> scaling;      // t_i(normalized) = scaling_i * invariant_i(x)
  MetricField g;                      // contravariant pushforward, normalized frame
  MetricField gt;                     // unit anti-diagonal partner
  VectorField euler;                  // sum d_i t^i d/dt^i
  VectorField identity;               // d/dt^1
  Report checks;
};

/// The orbit-space pencil: pushforward metric plus its derivative along the
/// unit-direction field, scaled to a unit anti-diagonal partner.
/// NormalizationFailed when the basis is not of the required kind.
SaitoPencilResult saito_pencil(const CoxeterDatum& cd);

struct ModifiedSaitoResult {
  SaitoPencilResult base;
  RationalExpr c, d;
  RationalExpr quadratic;  // the ambient sum of squares in normalized coordinates
  RationalExpr omega;      // (c q + d)^-1
  ScaledPencil pencil;
  Report checks;
};

/// The same pipeline started from the constant-curvature ambient metric:
/// scaled pair with flat partner, constant sectional curvature 4cd,
/// compatibility, quasi-homogeneity and F-manifold conditions.
ModifiedSaitoResult modified_saito(const CoxeterDatum& cd, const RationalExpr& c,
                                   const RationalExpr& d);

/// det T factors exactly into the two excluded loci.
Report regularity_locus(const ModifiedSaitoResult& ms);

struct FlatCoordinateResult {
  std::map<std::string, RationalExpr> map;  // new coordinates as functions of the old
  Report checks;
};

/// Flat coordinates of the scaled anti-diagonal metric on an abstract chart:
/// emits the coordinate change and verifies the pullback identity
/// sum dt~^i dt~^{n+1-i} = (c t^n + d)^-2 sum dt^i dt^{n+1-i} exactly.
/// DeterminantNotOne unless a d - b c = 1.
FlatCoordinateResult modified_flat_coordinates(std::size_t n, const RationalExpr& a,
                                               const RationalExpr& b, const RationalExpr& c,
                                               const RationalExpr& d);

/// Prepotential of the pencil through the induced product (polynomial
/// integration); the unit anti-diagonal gt serves as eta.
Prepotential saito_prepotential(const SaitoPencilResult& sp);

}  // namespace symt
