#pragma once

#include <functional>
#include <optional>

#include "symtensor/pencil.hpp"
#include "symtensor/report.hpp"
#include "symtensor/tensor.hpp"

namespace symt {

/// A WDVV prepotential in flat coordinates, with its constant metric, an
/// optional Euler field and the rewrite rules closing the derivatives of any
/// opaque terms.
struct Prepotential {
  Chart chart;
  RationalExpr F;
  MetricField eta;  // covariant, constant, invertible
  std::optional<VectorField> euler;
  RuleSet rules;
};

/// Third-derivative tensor of F with rules applied, F_{ijk}.
std::vector<Matrix> third_derivatives(const Prepotential& p);

/// Associativity equations for the prepotential. Throws EtaMismatch when the
/// unit-coordinate normalization eta_ij = F_{1ij} fails.
Report check_wdvv(const Prepotential& p);

struct FrobeniusStructure {
  Prepotential prep;
  MultiplicationTable tangent;  // c^k_{ij} = eta^{kl} F_{lij}
  VectorField identity;         // d/dt1
  Report checks;
};

/// Builds the multiplication and verifies the algebra and Euler conditions.
/// Throws WdvvFailed when the associativity gate does not pass.
FrobeniusStructure frobenius_from_prepotential(const Prepotential& p);

struct IntersectionResult {
  MetricField g;  // contravariant
  Report checks;
};

/// g*(dt^i, dt^j) = E^k c_k^{ij}; verifies symmetry and that (g, eta) is a
/// compatible pencil, flat where the multiplication by E is invertible.
IntersectionResult intersection_form(const FrobeniusStructure& s);

/// The identity field of a tangent multiplication table, if one exists.
std::optional<VectorField> table_identity(const MultiplicationTable& tangent);

/// Conditions for a weak F-manifold structure: Frobenius algebra pointwise,
/// Euler rescalings (factors reported, constancy reported separately),
/// invertibility of E in the algebra, and the Euler-slot symmetry of the
/// covariant derivative of the multiplication.
Report weak_f_manifold_check(const MetricField& gt, const MultiplicationTable& tangent,
                             const VectorField& e, const RuleSet& rules = no_rules());

/// Full symmetry of nabla(multiplication) plus the independent closed-
/// coidentity route; both verdicts and their agreement are reported.
Report f_manifold_check(const MetricField& gt, const MultiplicationTable& tangent,
                        const VectorField& e, const RuleSet& rules = no_rules());

/// Curvature identity relating the counterpart metric h, the invariant
/// metric gt, dD~ and multiplication by the inverse Euler field; when gt is
/// flat, additionally checks the constant-curvature equivalence instance.
Report theorem_gen_curvature_identity(const MetricField& gt, const MetricField& h,
                                      const MultiplicationTable& tangent, const VectorField& e,
                                      const RuleSet& rules = no_rules());

/// Antiderivative within the supported class: polynomials in v, rational
/// dependence through one linear-in-v denominator factor, and single opaque
/// atoms whose v-dependent argument slot has a v-free derivative.
RationalExpr antiderivative(const RationalExpr& e, const std::string& v, const RuleSet& rules);

/// Rebuild a function from its symmetric order-r derivative data over the
/// listed variables (integration constants fixed to zero).
RationalExpr reconstruct_from_derivatives(
    int order, const std::vector<std::string>& vars,
    const std::function<RationalExpr(const std::vector<std::size_t>&)>& data,
    const RuleSet& rules);

struct Sl2Result {
  Prepotential transformed;
  Report checks;
};

/// Moebius change of the distinguished flat coordinate together with the
/// induced change of the remaining flat coordinates; produces the new
/// prepotential by integrating the transformed structure constants.
/// Requires a*d - b*c = 1 and a unit anti-diagonal eta.
Sl2Result sl2_transform(const Prepotential& p, const RationalExpr& a, const RationalExpr& b,
                        const RationalExpr& c, const RationalExpr& d);

}  // namespace symt
