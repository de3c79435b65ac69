#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "symtensor/expr.hpp"
#include "symtensor/report.hpp"

namespace symt {

using Matrix = std::vector<std::vector<RationalExpr>>;

struct Chart {
  std::string name;
  std::vector<std::string> coords;

  Chart() = default;
  Chart(std::string name_, std::vector<std::string> coords_);
  std::size_t dim() const { return coords.size(); }
  bool operator==(const Chart& o) const { return coords == o.coords; }
};

// small exact linear algebra over the rational-function field
RationalExpr matrix_determinant(const Matrix& m);
Matrix matrix_inverse(const Matrix& m);  // SingularMetric if det == 0
Matrix matrix_mul(const Matrix& a, const Matrix& b);

enum class Variance { covariant, contravariant };

struct VectorField {
  Chart chart;
  std::vector<RationalExpr> comp;
};

struct OneForm {
  Chart chart;
  std::vector<RationalExpr> comp;
};

struct ConnectionField {
  Chart chart;
  // gamma[k][i][j], symmetric in (i, j)
  std::vector<Matrix> gamma;
};

struct CurvatureField {
  Chart chart;
  // r[l][k][i][j] with R(e_i, e_j) e_k = r[l][k][i][j] e_l
  std::vector<std::vector<Matrix>> r;
  bool is_zero() const;
};

/// Symmetric nondegenerate metric on a chart. The inverse-variance twin,
/// determinant, Levi-Civita connection and curvature are computed once and
/// shared between copies.
class MetricField {
 public:
  MetricField(Chart chart, Variance variance, Matrix components);

  const Chart& chart() const { return chart_; }
  Variance variance() const { return variance_; }
  const Matrix& components() const { return comp_; }
  const RationalExpr& at(std::size_t i, std::size_t j) const { return comp_[i][j]; }
  std::size_t dim() const { return chart_.dim(); }

  const RationalExpr& determinant() const;
  /// Metric with inverted components and flipped variance.
  MetricField dual() const;
  /// This metric in covariant (resp. contravariant) position.
  MetricField covariant() const;
  MetricField contravariant() const;

  MetricField scaled(const RationalExpr& factor) const;

 private:
  Chart chart_;
  Variance variance_;
  Matrix comp_;
  struct Cache {
    std::mutex mu;
    std::optional<RationalExpr> det;
    std::optional<Matrix> inverse;
    std::optional<ConnectionField> connection;
    std::optional<CurvatureField> curvature;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
  MetricField() = default;
  // construction without the symmetry/determinant checks, for internal
  // callers that already know the invariants hold; the second form also
  // seeds the cached inverse
  static MetricField trusted(Chart chart, Variance variance, Matrix components);
  static MetricField trusted(Chart chart, Variance variance, Matrix components, Matrix inverse);
  friend const ConnectionField& metric_connection(const MetricField& g);
  friend const CurvatureField& metric_curvature(const MetricField& g);
  friend class MetricPair;
};

/// Cached Levi-Civita connection of the covariant form of g.
const ConnectionField& metric_connection(const MetricField& g);
/// Cached curvature of the covariant form of g.
const CurvatureField& metric_curvature(const MetricField& g);

/// Christoffel symbols of W^2 g from those of g, by the conformal shift
/// with w = dW/W. Takes the covariant and contravariant components of the
/// unscaled metric.
ConnectionField conformal_connection_shift(const Chart& chart, const Matrix& g_cov,
                                           const Matrix& g_con, const ConnectionField& base,
                                           const RationalExpr& omega);

// musical maps and scalars
OneForm lower(const MetricField& g, const VectorField& x);    // g covariant
VectorField raise(const MetricField& g, const OneForm& a);    // uses g contravariant
RationalExpr inner_form(const MetricField& g, const OneForm& a, const OneForm& b);
RationalExpr inner_vec(const MetricField& g, const VectorField& x, const VectorField& y);
OneForm differential(const Chart& chart, const RationalExpr& f);
RationalExpr apply_form(const OneForm& a, const VectorField& x);
RationalExpr direct(const VectorField& x, const RationalExpr& f);  // X(f)

ConnectionField christoffel(const MetricField& g);
CurvatureField riemann(const ConnectionField& c);

/// Lowered curvature R_{lkij} = g_{lm} R^m_{kij}.
std::vector<std::vector<Matrix>> lower_curvature(const MetricField& g, const CurvatureField& r);

/// The constant s with R_{lkij} = s (g_{li} g_{kj} - g_{lj} g_{ki}), if it
/// exists; s = 0 means flat, absent means no constant shape.
std::optional<RationalExpr> constant_sectional_curvature(const MetricField& g);

/// Lie derivative of a metric along a vector field (either variance). The
/// result is a symmetric 2-tensor in the metric's variance; it need not be
/// invertible, so it is returned as a plain component matrix.
Matrix lie_derivative_metric(const VectorField& z, const MetricField& g);

/// The factor p with L_Z g = p g for the covariant metric (sign-adjusted when
/// the input is contravariant), if one exists as a rational expression.
std::optional<RationalExpr> conformal_factor(const VectorField& z, const MetricField& g);

OneForm covariant_derivative_oneform(const ConnectionField& c, const VectorField& x,
                                     const OneForm& a);

/// (nabla E)^k_j = d_j E^k + Gamma^k_{jm} E^m as a matrix; callers test
/// proportionality to the identity.
Matrix nabla_endomorphism(const ConnectionField& c, const VectorField& e);

/// If m = f * Id for some rational function f, return f.
std::optional<RationalExpr> proportional_to_identity(const Matrix& m);

MetricField conformal_rescale(const MetricField& g, const RationalExpr& omega);

/// Componentwise verification of the conformal change of the Levi-Civita
/// connection and of the difference identity between the scaled and the
/// original pairs.
Report scaled_connection_difference(const MetricField& g, const MetricField& gt,
                                    const RationalExpr& omega);

/// For a conformal field Z (L_Z g = p g), verify the closed-form expression
/// of the Lie derivative of the Levi-Civita connection, computed directly
/// from the definition. NotConformal if no factor p exists.
Report lie_derivative_connection(const VectorField& z, const MetricField& g);

// shared small helpers
bool expr_is_chart_constant(const RationalExpr& e, const Chart& chart);
std::string witness_entry(const std::string& label, const RationalExpr& value);

}  // namespace symt
