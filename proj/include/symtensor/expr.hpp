#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "symtensor/errors.hpp"

namespace symt {

/// Exact rational scalar. GMP keeps these canonical (reduced, positive
/// denominator) through arithmetic.
using Rational = mpq_class;

Rational rational_from_string(const std::string& text);

/// Canonical rational from a numerator/denominator pair. Plain
/// mpq_class(n, d) skips canonicalization, which breaks equality tests.
inline Rational make_rational(long num, long den = 1) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

class RationalExpr;

/// An opaque function symbol applied to argument expressions, together with a
/// derivative multi-index (one entry per argument). `D[f,2,2,3](t2,t3)` is
/// represented as name "f", index {2,1}, args {t2, t3}.
struct FunctionAtom {
  std::string name;
  std::vector<RationalExpr> args;
  std::vector<std::uint32_t> index;
};

int compare(const FunctionAtom& a, const FunctionAtom& b);

/// A polynomial indeterminate: a named variable or an opaque function atom.
using Indet = std::variant<std::string, FunctionAtom>;

int compare(const Indet& a, const Indet& b);

/// One polynomial term: exponents (parallel to the owning polynomial's indet
/// list) and a nonzero rational coefficient.
struct Term {
  std::vector<std::uint32_t> exps;
  Rational coeff;
};

/// Sparse multivariate polynomial over the rationals. Terms are kept in
/// ascending graded-lexicographic order and never store zero coefficients;
/// the indeterminate list is sorted and minimal.
class Polynomial {
 public:
  Polynomial() = default;

  static Polynomial constant(const Rational& c);
  static Polynomial from_int(long v) { return constant(Rational(v)); }
  static Polynomial variable(const std::string& name);
  static Polynomial indeterminate(const Indet& v);
  static Polynomial from_terms(std::vector<Indet> indets, std::vector<Term> terms);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_value() const;  // requires is_constant()
  bool is_one() const;

  const std::vector<Indet>& indets() const { return indets_; }
  const std::vector<Term>& terms() const { return terms_; }
  const Term& leading_term() const;  // graded-lex maximum

  long total_degree() const;  // -1 for the zero polynomial
  long degree_in(const Indet& v) const;
  bool depends_on(const Indet& v) const { return degree_in(v) > 0; }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  Polynomial& operator+=(const Polynomial& o) { return *this = *this + o; }
  Polynomial& operator-=(const Polynomial& o) { return *this = *this - o; }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }
  Polynomial pow(std::uint32_t n) const;
  Polynomial scaled(const Rational& c) const;

  static int compare(const Polynomial& a, const Polynomial& b);
  bool operator==(const Polynomial& o) const { return compare(*this, o) == 0; }
  bool operator!=(const Polynomial& o) const { return !(*this == o); }

  /// Rational content: positive c with *this = c * primitive integer poly.
  Rational content() const;
  /// Integer-primitive associate with positive leading coefficient.
  Polynomial primitive_part() const;
  static Polynomial gcd(const Polynomial& a, const Polynomial& b);
  static std::optional<Polynomial> divide_exact(const Polynomial& a, const Polynomial& b);

 private:
  std::vector<Indet> indets_;
  std::vector<Term> terms_;

  void strip_unused_indets();
  static void unify(const Polynomial& a, const Polynomial& b, Polynomial& ua, Polynomial& ub);
  friend class RationalExpr;
};

/// Exact rational function: a reduced quotient of two polynomials whose
/// indeterminates may include opaque function atoms. Canonical form:
/// gcd(num, den) = 1 and den integer-primitive with positive leading
/// coefficient (so structural equality decides equality of rational
/// functions, up to any pending rewrite rules).
class RationalExpr {
 public:
  RationalExpr();  // zero

  static RationalExpr constant(const Rational& c);
  static RationalExpr from_int(long v) { return constant(Rational(v)); }
  static RationalExpr variable(const std::string& name);
  static RationalExpr atom(FunctionAtom a);
  static RationalExpr from_polynomial(Polynomial p);
  static RationalExpr fraction(Polynomial num, Polynomial den);

  const Polynomial& num() const { return d_->num; }
  const Polynomial& den() const { return d_->den; }

  bool is_zero() const { return d_->num.is_zero(); }
  bool is_constant() const;
  Rational constant_value() const;
  bool is_polynomial() const { return d_->den.is_one(); }
  /// True if the named variable occurs anywhere, including inside atom args.
  bool depends_on_variable(const std::string& name) const;
  /// All variable names occurring anywhere, including inside atom args.
  std::vector<std::string> variables() const;
  bool has_atoms() const;

  friend RationalExpr operator+(const RationalExpr& a, const RationalExpr& b);
  friend RationalExpr operator-(const RationalExpr& a, const RationalExpr& b);
  friend RationalExpr operator-(const RationalExpr& a);
  friend RationalExpr operator*(const RationalExpr& a, const RationalExpr& b);
  friend RationalExpr operator/(const RationalExpr& a, const RationalExpr& b);
  RationalExpr& operator+=(const RationalExpr& o) { return *this = *this + o; }
  RationalExpr& operator-=(const RationalExpr& o) { return *this = *this - o; }
  RationalExpr& operator*=(const RationalExpr& o) { return *this = *this * o; }
  RationalExpr& operator/=(const RationalExpr& o) { return *this = *this / o; }
  RationalExpr pow(long n) const;

  static int compare(const RationalExpr& a, const RationalExpr& b);
  bool operator==(const RationalExpr& o) const { return compare(*this, o) == 0; }
  bool operator!=(const RationalExpr& o) const { return !(*this == o); }

  RationalExpr derivative(const std::string& var) const;
  RationalExpr substitute(const std::map<std::string, RationalExpr>& bindings) const;

  std::string str() const;

 private:
  struct Data {
    Polynomial num;
    Polynomial den;
  };
  std::shared_ptr<const Data> d_;
  explicit RationalExpr(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  static RationalExpr make_reduced(Polynomial num, Polynomial den);
};

inline RationalExpr operator+(const RationalExpr& a, long b) { return a + RationalExpr::from_int(b); }
inline RationalExpr operator-(const RationalExpr& a, long b) { return a - RationalExpr::from_int(b); }
inline RationalExpr operator*(const RationalExpr& a, long b) { return a * RationalExpr::from_int(b); }
inline RationalExpr operator/(const RationalExpr& a, long b) { return a / RationalExpr::from_int(b); }
inline RationalExpr operator*(long a, const RationalExpr& b) { return RationalExpr::from_int(a) * b; }

/// A rewrite rule for derivatives of one opaque function: any atom of
/// `function` whose multi-index dominates `lhs_index` componentwise is
/// replaced by the matching formal derivative of `rhs` evaluated at the
/// atom's arguments. `rhs` is written in the formal argument variables.
struct RewriteRule {
  std::string function;
  std::vector<std::string> formal_args;
  std::vector<std::uint32_t> lhs_index;
  RationalExpr rhs;

  RewriteRule(std::string function, std::vector<std::string> formal_args,
              std::vector<std::uint32_t> lhs_index, RationalExpr rhs);
};

class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<RewriteRule> rules) : rules_(std::move(rules)) {}
  void add(RewriteRule r) { rules_.push_back(std::move(r)); }
  bool empty() const { return rules_.empty(); }
  const std::vector<RewriteRule>& rules() const { return rules_; }

  /// Reduction for a single atom, if some rule applies.
  std::optional<RationalExpr> reduce_atom(const FunctionAtom& a) const;

 private:
  std::vector<RewriteRule> rules_;
};

/// Exhaustive rewrite-rule application (to a fixed point), then canonical
/// re-normalization.
RationalExpr apply_rules(const RationalExpr& e, const RuleSet& rules);

/// Canonical-form equality test modulo a rewrite system.
bool is_zero_modulo(const RationalExpr& e, const RuleSet& rules);

/// Shared empty rule set, used as the default for identity checks.
const RuleSet& no_rules();

/// A family of fractions over one common denominator. Identity checks clear
/// denominators once and then work in plain polynomial arithmetic.
struct ClearedFractions {
  Polynomial den;
  std::vector<Polynomial> num;
};
ClearedFractions clear_denominators(const std::vector<RationalExpr>& es);

/// Parse the expression grammar: integers, rationals p/q, variables,
/// + - * / ^ (integer exponents, possibly negative), parentheses, function
/// application f(t2,t3) and derivative notation D[f,2,3](t2,t3).
RationalExpr parse_expr(const std::string& text);

/// Deterministic printing in the same grammar, graded-lex term order.
std::string to_string(const RationalExpr& e);
std::string to_string(const Polynomial& p);

}  // namespace symt
