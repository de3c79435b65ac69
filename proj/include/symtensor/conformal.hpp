#pragma once

#include "symtensor/frobenius.hpp"
#include "symtensor/pencil.hpp"

namespace symt {

/// A compatible pair scaled by a conformal factor, with the Euler field that
/// drives the quasi-homogeneity checks.
struct ScaledPencil {
  MetricPair base;    // (g, gt)
  RationalExpr omega;
  MetricPair scaled;  // (W^2 g, W^2 gt)
  VectorField euler;
  RuleSet rules;
};

ScaledPencil make_scaled_pencil(MetricPair base, RationalExpr omega, VectorField euler,
                                RuleSet rules = RuleSet());

/// L_E ht = Dt ht, nabla^h E = (D/2) Id, Dt - D constant; the regularity
/// locus of the induced product is recorded.
Report weak_quasihomogeneous_check(const ScaledPencil& sp);

/// E rescales the tangent product by a constant iff Dt - D is constant, and
/// the factor is exactly Dt - D. In dimension two the factor may be a
/// nonconstant function; the report records it either way.
Report euler_multiplication_rescaling_check(const ScaledPencil& sp);

/// The tangent products of the scaled and the base pairs agree; on the
/// cotangent side they differ by W^-2, and the two intermediate formulas for
/// the scaled product and its unit endomorphism hold.
Report scaled_multiplication_agreement_check(const ScaledPencil& sp);

/// Four statements evaluated independently and compared: weak
/// quasi-homogeneity, g(E) ^ dW = 0, F-manifold, weak F-manifold.
Report weak_f_equivalence_check(const ScaledPencil& sp);

/// Factor bookkeeping of the scaling: the scaled Lie factors against the
/// base ones, the decomposition of nabla^h E, and the exchange symmetry on
/// the scaled pair.
Report scaled_factor_identities(const ScaledPencil& sp);

}  // namespace symt
