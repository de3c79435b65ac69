#pragma once

#include <map>
#include <string>
#include <vector>

#include "symtensor/expr.hpp"

namespace symt {

/// Value, gradient and Hessian of an expression at a point, all exact.
/// Second-order truncated Taylor arithmetic: enough for curvature, which
/// needs two derivatives of the metric.
struct Jet2 {
  Rational value;
  std::vector<Rational> grad;
  std::vector<std::vector<Rational>> hess;

  explicit Jet2(std::size_t n)
      : value(0), grad(n, Rational(0)), hess(n, std::vector<Rational>(n, Rational(0))) {}

  std::size_t dim() const { return grad.size(); }
};

struct SampleKey {
  std::string name;
  std::vector<std::uint32_t> index;
  bool operator<(const SampleKey& o) const {
    if (name != o.name) return name < o.name;
    return index < o.index;
  }
};

/// Values of opaque function derivatives at the evaluation point, keyed by
/// function name and derivative multi-index.
using FunctionSamples = std::map<SampleKey, Rational>;

struct JetPoint {
  std::vector<std::string> variables;  // jet dimensions, in order
  std::vector<Rational> values;
  FunctionSamples samples;
};

Jet2 jet_add(const Jet2& a, const Jet2& b);
Jet2 jet_sub(const Jet2& a, const Jet2& b);
Jet2 jet_mul(const Jet2& a, const Jet2& b);
Jet2 jet_div(const Jet2& a, const Jet2& b);  // PoleAtPoint if b.value == 0
Jet2 jet_neg(const Jet2& a);

/// Exact second-order jet of e at the point. Every variable of e must be
/// listed in the point; opaque atoms draw their derivative values (up to two
/// orders above the atom's own index) from the samples map.
Jet2 jet_eval(const RationalExpr& e, const JetPoint& point);

/// Plain evaluation (order zero).
Rational evaluate(const RationalExpr& e, const JetPoint& point);

struct CurvaturePoint {
  std::vector<std::vector<std::vector<Rational>>> gamma;        // [k][i][j]
  std::vector<std::vector<std::vector<std::vector<Rational>>>> riemann;  // [l][k][i][j]
  std::vector<std::vector<std::vector<std::vector<Rational>>>> lowered;  // [l][k][i][j]
};

/// Christoffel symbols and curvature at a point straight from jets of the
/// covariant metric components, with no symbolic differentiation. The metric
/// entries are given row-major, dimension n, in the jet variables' order
/// (chart coordinates must come first).
CurvaturePoint oracle_curvature(const std::vector<std::vector<RationalExpr>>& g_cov,
                                std::size_t n, const JetPoint& point);

}  // namespace symt
