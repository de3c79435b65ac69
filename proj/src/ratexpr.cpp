#include <algorithm>
#include <cassert>
#include <set>

#include "symtensor/expr.hpp"

namespace symt {

Rational rational_from_string(const std::string& text) {
  Rational r;
  if (r.set_str(text, 10) != 0) throw Error("bad rational literal: " + text);
  r.canonicalize();
  return r;
}

RationalExpr::RationalExpr() {
  static const std::shared_ptr<const Data> zero =
      std::make_shared<Data>(Data{Polynomial(), Polynomial::constant(Rational(1))});
  d_ = zero;
}

RationalExpr RationalExpr::constant(const Rational& c) {
  return RationalExpr(std::make_shared<Data>(
      Data{Polynomial::constant(c), Polynomial::constant(Rational(1))}));
}

RationalExpr RationalExpr::variable(const std::string& name) {
  return RationalExpr(std::make_shared<Data>(
      Data{Polynomial::variable(name), Polynomial::constant(Rational(1))}));
}

RationalExpr RationalExpr::atom(FunctionAtom a) {
  assert(a.index.size() == a.args.size());
  return RationalExpr(std::make_shared<Data>(
      Data{Polynomial::indeterminate(Indet{std::move(a)}), Polynomial::constant(Rational(1))}));
}

RationalExpr RationalExpr::from_polynomial(Polynomial p) {
  return RationalExpr(std::make_shared<Data>(
      Data{std::move(p), Polynomial::constant(Rational(1))}));
}

RationalExpr RationalExpr::make_reduced(Polynomial num, Polynomial den) {
  if (den.is_zero()) throw ZeroDenominator();
  if (num.is_zero()) return RationalExpr();
  if (!den.is_constant()) {
    Polynomial g = Polynomial::gcd(num, den);
    if (!g.is_one()) {
      auto qn = Polynomial::divide_exact(num, g);
      auto qd = Polynomial::divide_exact(den, g);
      assert(qn && qd);
      num = std::move(*qn);
      den = std::move(*qd);
    }
  }
  // canonical unit: den integer-primitive with positive leading coefficient
  Rational c = den.content();
  if (den.leading_term().coeff < 0) c = -c;
  if (c != 1) {
    Rational inv = Rational(1) / c;
    num = num.scaled(inv);
    den = den.scaled(inv);
  }
  if (den.is_one()) den = Polynomial::constant(Rational(1));
  return RationalExpr(std::make_shared<Data>(Data{std::move(num), std::move(den)}));
}

RationalExpr RationalExpr::fraction(Polynomial num, Polynomial den) {
  return make_reduced(std::move(num), std::move(den));
}

bool RationalExpr::is_constant() const {
  return d_->num.is_constant() && d_->den.is_constant();
}

Rational RationalExpr::constant_value() const {
  assert(is_constant());
  if (d_->num.is_zero()) return Rational(0);
  return d_->num.constant_value() / d_->den.constant_value();
}

namespace {

bool poly_depends_on_variable(const Polynomial& p, const std::string& name);

bool atom_depends_on_variable(const FunctionAtom& a, const std::string& name) {
  for (const auto& arg : a.args)
    if (arg.depends_on_variable(name)) return true;
  return false;
}

bool poly_depends_on_variable(const Polynomial& p, const std::string& name) {
  for (const auto& v : p.indets()) {
    if (std::holds_alternative<std::string>(v)) {
      if (std::get<std::string>(v) == name) return true;
    } else if (atom_depends_on_variable(std::get<FunctionAtom>(v), name)) {
      return true;
    }
  }
  return false;
}

void poly_collect_variables(const Polynomial& p, std::set<std::string>& out) {
  for (const auto& v : p.indets()) {
    if (std::holds_alternative<std::string>(v)) {
      out.insert(std::get<std::string>(v));
    } else {
      for (const auto& arg : std::get<FunctionAtom>(v).args) {
        poly_collect_variables(arg.num(), out);
        poly_collect_variables(arg.den(), out);
      }
    }
  }
}

bool poly_has_atoms(const Polynomial& p) {
  for (const auto& v : p.indets()) {
    if (std::holds_alternative<FunctionAtom>(v)) return true;
    }
  return false;
}

}  // namespace

bool RationalExpr::depends_on_variable(const std::string& name) const {
  return poly_depends_on_variable(d_->num, name) || poly_depends_on_variable(d_->den, name);
}

std::vector<std::string> RationalExpr::variables() const {
  std::set<std::string> vars;
  poly_collect_variables(d_->num, vars);
  poly_collect_variables(d_->den, vars);
  return {vars.begin(), vars.end()};
}

bool RationalExpr::has_atoms() const {
  return poly_has_atoms(d_->num) || poly_has_atoms(d_->den);
}

RationalExpr operator+(const RationalExpr& a, const RationalExpr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.den() == b.den())
    return RationalExpr::fraction(a.num() + b.num(), a.den());
  return RationalExpr::fraction(a.num() * b.den() + b.num() * a.den(), a.den() * b.den());
}

RationalExpr operator-(const RationalExpr& a) {
  return RationalExpr::fraction(-a.num(), a.den());
}

RationalExpr operator-(const RationalExpr& a, const RationalExpr& b) { return a + (-b); }

RationalExpr operator*(const RationalExpr& a, const RationalExpr& b) {
  if (a.is_zero() || b.is_zero()) return RationalExpr();
  return RationalExpr::fraction(a.num() * b.num(), a.den() * b.den());
}

RationalExpr operator/(const RationalExpr& a, const RationalExpr& b) {
  if (b.is_zero()) throw ZeroDenominator();
  return RationalExpr::fraction(a.num() * b.den(), a.den() * b.num());
}

RationalExpr RationalExpr::pow(long n) const {
  if (n == 0) return RationalExpr::from_int(1);
  bool neg = n < 0;
  std::uint32_t k = static_cast<std::uint32_t>(neg ? -n : n);
  Polynomial pn = num().pow(k);
  Polynomial pd = den().pow(k);
  if (neg) {
    if (is_zero()) throw ZeroDenominator();
    return fraction(std::move(pd), std::move(pn));
  }
  return fraction(std::move(pn), std::move(pd));
}

int RationalExpr::compare(const RationalExpr& a, const RationalExpr& b) {
  if (a.d_ == b.d_) return 0;
  int c = Polynomial::compare(a.num(), b.num());
  if (c != 0) return c;
  return Polynomial::compare(a.den(), b.den());
}

namespace {

// d(indet)/dvar as a rational expression; atoms use the chain rule.
RationalExpr indet_derivative(const Indet& v, const std::string& var) {
  if (std::holds_alternative<std::string>(v)) {
    return std::get<std::string>(v) == var ? RationalExpr::from_int(1) : RationalExpr();
  }
  const auto& a = std::get<FunctionAtom>(v);
  RationalExpr sum;
  for (std::size_t s = 0; s < a.args.size(); ++s) {
    RationalExpr darg = a.args[s].derivative(var);
    if (darg.is_zero()) continue;
    FunctionAtom bumped = a;
    bumped.index[s] += 1;
    sum += RationalExpr::atom(std::move(bumped)) * darg;
  }
  return sum;
}

RationalExpr poly_derivative(const Polynomial& p, const std::string& var) {
  RationalExpr result;
  const auto& indets = p.indets();
  std::vector<RationalExpr> dind(indets.size());
  std::vector<bool> nonzero(indets.size(), false);
  for (std::size_t i = 0; i < indets.size(); ++i) {
    dind[i] = indet_derivative(indets[i], var);
    nonzero[i] = !dind[i].is_zero();
  }
  for (const auto& t : p.terms()) {
    for (std::size_t i = 0; i < t.exps.size(); ++i) {
      if (t.exps[i] == 0 || !nonzero[i]) continue;
      Term reduced = t;
      reduced.exps[i] -= 1;
      reduced.coeff *= Rational(t.exps[i]);
      Polynomial mono = Polynomial::from_terms(indets, {reduced});
      result += RationalExpr::from_polynomial(std::move(mono)) * dind[i];
    }
  }
  return result;
}

}  // namespace

RationalExpr RationalExpr::derivative(const std::string& var) const {
  RationalExpr dn = poly_derivative(num(), var);
  if (is_polynomial()) return dn;
  RationalExpr dd = poly_derivative(den(), var);
  RationalExpr denom = from_polynomial(den());
  return (dn * denom - from_polynomial(num()) * dd) / (denom * denom);
}

namespace {

RationalExpr poly_map(const Polynomial& p,
                      const std::vector<RationalExpr>& indet_values) {
  RationalExpr result;
  for (const auto& t : p.terms()) {
    RationalExpr term = RationalExpr::constant(t.coeff);
    for (std::size_t i = 0; i < t.exps.size(); ++i) {
      if (t.exps[i] == 0) continue;
      term *= indet_values[i].pow(t.exps[i]);
    }
    result += term;
  }
  return result;
}

}  // namespace

RationalExpr RationalExpr::substitute(const std::map<std::string, RationalExpr>& bindings) const {
  auto map_poly = [&](const Polynomial& p) {
    std::vector<RationalExpr> values;
    values.reserve(p.indets().size());
    for (const auto& v : p.indets()) {
      if (std::holds_alternative<std::string>(v)) {
        auto it = bindings.find(std::get<std::string>(v));
        values.push_back(it == bindings.end() ? RationalExpr::variable(std::get<std::string>(v))
                                              : it->second);
      } else {
        FunctionAtom a = std::get<FunctionAtom>(v);
        for (auto& arg : a.args) arg = arg.substitute(bindings);
        values.push_back(RationalExpr::atom(std::move(a)));
      }
    }
    return poly_map(p, values);
  };
  RationalExpr n = map_poly(num());
  RationalExpr d = map_poly(den());
  if (d.is_zero()) throw ZeroDenominator();
  return n / d;
}

RewriteRule::RewriteRule(std::string function_, std::vector<std::string> formal_args_,
                         std::vector<std::uint32_t> lhs_index_, RationalExpr rhs_)
    : function(std::move(function_)),
      formal_args(std::move(formal_args_)),
      lhs_index(std::move(lhs_index_)),
      rhs(std::move(rhs_)) {
  if (lhs_index.size() != formal_args.size())
    throw Error("rewrite rule: multi-index length must equal argument count");
  // the rule must not be able to fire on its own right-hand side
  for (const auto& v : rhs.num().indets()) {
    if (!std::holds_alternative<FunctionAtom>(v)) continue;
    const auto& a = std::get<FunctionAtom>(v);
    if (a.name != function || a.index.size() != lhs_index.size()) continue;
    bool dominates = true;
    for (std::size_t i = 0; i < lhs_index.size(); ++i)
      if (a.index[i] < lhs_index[i]) dominates = false;
    if (dominates) throw Error("rewrite rule does not reduce the derivative order");
  }
}

std::optional<RationalExpr> RuleSet::reduce_atom(const FunctionAtom& a) const {
  for (const auto& rule : rules_) {
    if (rule.function != a.name) continue;
    if (rule.lhs_index.size() != a.index.size()) continue;
    bool dominates = true;
    for (std::size_t i = 0; i < a.index.size(); ++i)
      if (a.index[i] < rule.lhs_index[i]) dominates = false;
    if (!dominates) continue;
    RationalExpr expr = rule.rhs;
    for (std::size_t s = 0; s < a.index.size(); ++s)
      for (std::uint32_t k = rule.lhs_index[s]; k < a.index[s]; ++k)
        expr = expr.derivative(rule.formal_args[s]);
    std::map<std::string, RationalExpr> bind;
    for (std::size_t s = 0; s < a.args.size(); ++s)
      bind[rule.formal_args[s]] = a.args[s];
    return expr.substitute(bind);
  }
  return std::nullopt;
}

namespace {

// One rewrite pass over a polynomial; returns nullopt if nothing fired.
std::optional<RationalExpr> rewrite_poly_once(const Polynomial& p, const RuleSet& rules) {
  const auto& indets = p.indets();
  std::vector<RationalExpr> values;
  values.reserve(indets.size());
  bool changed = false;
  for (const auto& v : indets) {
    if (std::holds_alternative<std::string>(v)) {
      values.push_back(RationalExpr::variable(std::get<std::string>(v)));
      continue;
    }
    FunctionAtom a = std::get<FunctionAtom>(v);
    bool argChanged = false;
    for (auto& arg : a.args) {
      RationalExpr r = apply_rules(arg, rules);
      if (r != arg) {
        arg = r;
        argChanged = true;
      }
    }
    if (auto red = rules.reduce_atom(a)) {
      values.push_back(*red);
      changed = true;
    } else {
      values.push_back(RationalExpr::atom(std::move(a)));
      changed = changed || argChanged;
    }
  }
  if (!changed) return std::nullopt;
  return poly_map(p, values);
}

}  // namespace

RationalExpr apply_rules(const RationalExpr& e, const RuleSet& rules) {
  if (rules.empty()) return e;
  RationalExpr cur = e;
  for (int guard = 0; guard < 1000; ++guard) {
    auto n = rewrite_poly_once(cur.num(), rules);
    auto d = rewrite_poly_once(cur.den(), rules);
    if (!n && !d) return cur;
    RationalExpr nn = n ? *n : RationalExpr::from_polynomial(cur.num());
    RationalExpr dd = d ? *d : RationalExpr::from_polynomial(cur.den());
    if (dd.is_zero()) throw ZeroDenominator();
    cur = nn / dd;
  }
  throw Error("rewrite rules did not reach a fixed point");
}

bool is_zero_modulo(const RationalExpr& e, const RuleSet& rules) {
  return apply_rules(e, rules).is_zero();
}

const RuleSet& no_rules() {
  static const RuleSet empty;
  return empty;
}

ClearedFractions clear_denominators(const std::vector<RationalExpr>& es) {
  ClearedFractions out;
  out.den = Polynomial::constant(Rational(1));
  for (const auto& e : es) {
    if (e.den().is_one()) continue;
    Polynomial g = Polynomial::gcd(out.den, e.den());
    auto q = Polynomial::divide_exact(e.den(), g);
    out.den = out.den * *q;
  }
  out.num.reserve(es.size());
  for (const auto& e : es) {
    auto cof = Polynomial::divide_exact(out.den, e.den());
    if (!cof) throw Error("internal: cleared denominator is not a common multiple");
    out.num.push_back(e.num() * *cof);
  }
  return out;
}

}  // namespace symt
