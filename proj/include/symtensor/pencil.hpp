#pragma once

#include <memory>
#include <mutex>

#include "symtensor/report.hpp"
#include "symtensor/tensor.hpp"

namespace symt {

/// Extra variable adjoined for pencil identities; quantified statements in
/// the pencil parameter become rational-function identities in it.
inline const std::string kPencilParameter = "lambda";

struct EndomorphismField {
  Chart chart;
  Matrix comp;  // comp[i][j]: T(e_j) = comp[i][j] e_i
};

enum class Space { cotangent, tangent };

/// Structure constants of a product on basis (co)vectors:
/// e_i * e_j = sum_m c[i][j][m] e_m.
struct MultiplicationTable {
  Chart chart;
  Space space;
  std::vector<Matrix> c;

  const RationalExpr& at(std::size_t i, std::size_t j, std::size_t m) const {
    return c[i][j][m];
  }
};

/// A pair of metrics on one chart with the derived pencil data computed
/// lazily and shared between checks.
class MetricPair {
 public:
  MetricPair(MetricField g, MetricField gt);

  const Chart& chart() const { return g_.chart(); }
  std::size_t dim() const { return g_.dim(); }

  const MetricField& g_cov() const;
  const MetricField& g_con() const;
  const MetricField& gt_cov() const;
  const MetricField& gt_con() const;

  const ConnectionField& gamma_g() const;
  const ConnectionField& gamma_gt() const;

  /// Covariant metric of the pencil g* + lambda gt*, entries rational in the
  /// chart coordinates and the pencil parameter.
  const MetricField& lambda_cov() const;
  const ConnectionField& gamma_lambda() const;

  const CurvatureField& riemann_g() const;
  const CurvatureField& riemann_gt() const;
  const CurvatureField& riemann_lambda() const;

  MetricPair scaled(const RationalExpr& omega) const;  // (W^2 g, W^2 gt)

 private:
  MetricPair() = default;
  MetricField g_, gt_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
  // set when this pair was produced by scaled(); derived data then comes
  // from the base pair through the conformal shift instead of fresh
  // inversions and derivatives
  std::shared_ptr<const MetricPair> scale_base_;
  RationalExpr scale_omega_;
};

/// Cotangent product of the pair: a o b = nabla^g_{g* a} b - nabla^gt_{g* a} b.
MultiplicationTable circ_multiplication(const MetricPair& p);

/// Integrability tensor of an endomorphism on coordinate fields;
/// result[l][i][j] is the l-th component of N(e_i, e_j).
std::vector<Matrix> nijenhuis(const EndomorphismField& k);

EndomorphismField pair_endomorphism(const MetricPair& p);  // K = g* gt

Report is_almost_compatible(const MetricPair& p, const RuleSet& rules = no_rules());
Report check_auxiliary_identities(const MetricPair& p, const RuleSet& rules = no_rules());
Report is_compatible(const MetricPair& p, const RuleSet& rules = no_rules());

/// Compatibility through the connection-level formulations only (vanishing
/// integrability tensor, gradient-exchange symmetry, associator symmetry).
/// Avoids the pencil-curvature computation; used for parameter-heavy
/// instances.
Report is_compatible_connection_level(const MetricPair& p, const RuleSet& rules = no_rules());
Report is_flat_pencil(const MetricPair& p, const RuleSet& rules = no_rules());

/// Exchange symmetry g*(nabla^gt_X a - nabla^g_X a, gt(Y)) = (X <-> Y),
/// valid for almost compatible pairs.
Report lemma_exchange_symmetry(const MetricPair& p, const RuleSet& rules = no_rules());

struct BulletResult {
  EndomorphismField t;             // T(u) = g(E) o u on the cotangent space
  RationalExpr det_t;
  bool regular = false;
  Polynomial locus;                // primitive numerator of det T
  MultiplicationTable cotangent;   // u * v = u o T^{-1} v
  MultiplicationTable tangent;     // same product carried to TM through gt
  Report checks;
};

/// The product induced by the pair and a vector field E. SingularT when
/// det T vanishes identically.
BulletResult bullet_from_pencil(const MetricPair& p, const VectorField& e,
                               const RuleSet& rules = no_rules());

/// Lie derivative of a tangent-space multiplication table along a field.
std::vector<Matrix> lie_derivative_table(const VectorField& z, const MultiplicationTable& table);

/// Factor f with (L_Z table) = f * table, if any.
std::optional<RationalExpr> table_rescaling_factor(const VectorField& z,
                                                   const MultiplicationTable& table,
                                                   const RuleSet& rules = no_rules());

}  // namespace symt
