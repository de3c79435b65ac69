#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace symt {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ZeroDenominator : Error {
  ZeroDenominator() : Error("denominator normalizes to zero") {}
};

struct UnknownVariable : Error {
  explicit UnknownVariable(const std::string& name)
      : Error("unknown variable: " + name) {}
};

struct UnknownSymbol : Error {
  explicit UnknownSymbol(const std::string& name)
      : Error("unknown symbol: " + name) {}
};

struct SyntaxError : Error {
  std::size_t offset;
  SyntaxError(const std::string& message, std::size_t at)
      : Error(message + " at offset " + std::to_string(at)), offset(at) {}
};

struct SingularMetric : Error {
  SingularMetric() : Error("metric determinant is identically zero") {}
};

struct NotConformal : Error {
  NotConformal() : Error("vector field is not conformal for the metric") {}
};

struct ZeroConformalFactor : Error {
  ZeroConformalFactor() : Error("conformal factor is identically zero") {}
};

struct SingularT : Error {
  SingularT() : Error("endomorphism T has identically vanishing determinant") {}
};

struct WdvvFailed : Error {
  WdvvFailed() : Error("prepotential does not satisfy the associativity equations") {}
};

struct EtaMismatch : Error {
  EtaMismatch() : Error("third derivatives along the unit coordinate do not reproduce eta") {}
};

struct NotAntiDiagonal : Error {
  NotAntiDiagonal() : Error("metric is not constant anti-diagonal") {}
};

struct IntegrationUnsupported : Error {
  explicit IntegrationUnsupported(const std::string& detail)
      : Error("antiderivative outside the supported expression class: " + detail) {}
};

struct DeterminantNotOne : Error {
  DeterminantNotOne() : Error("parameters do not satisfy a*d - b*c = 1") {}
};

struct NormalizationFailed : Error {
  NormalizationFailed() : Error("pencil is not constant anti-diagonalizable by scaling") {}
};

struct RewriteFailed : Error {
  explicit RewriteFailed(const std::string& detail)
      : Error("polynomial cannot be rewritten in the invariant basis: " + detail) {}
};

struct PoleAtPoint : Error {
  PoleAtPoint() : Error("expression has a pole at the evaluation point") {}
};

struct MissingFunctionSample : Error {
  explicit MissingFunctionSample(const std::string& what)
      : Error("missing sample for function derivative " + what) {}
};

struct SingularAtPoint : Error {
  SingularAtPoint() : Error("matrix is singular at the evaluation point") {}
};

struct PreconditionFailed : Error {
  explicit PreconditionFailed(const std::string& what)
      : Error("precondition failed: " + what) {}
};

struct ScenarioError : Error {
  explicit ScenarioError(const std::string& what) : Error(what) {}
};

}  // namespace symt
