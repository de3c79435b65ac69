#include <algorithm>

#include "symtensor/jet.hpp"

namespace symt {

namespace {

std::string sample_label(const std::string& name, const std::vector<std::uint32_t>& idx) {
  std::string s = name + "[";
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(idx[i]);
  }
  return s + "]";
}

const Rational& sample(const FunctionSamples& samples, const std::string& name,
                       const std::vector<std::uint32_t>& idx) {
  auto it = samples.find(SampleKey{name, idx});
  if (it == samples.end()) throw MissingFunctionSample(sample_label(name, idx));
  return it->second;
}

}  // namespace

Jet2 jet_add(const Jet2& a, const Jet2& b) {
  Jet2 r(a.dim());
  r.value = a.value + b.value;
  for (std::size_t i = 0; i < r.dim(); ++i) {
    r.grad[i] = a.grad[i] + b.grad[i];
    for (std::size_t j = 0; j < r.dim(); ++j) r.hess[i][j] = a.hess[i][j] + b.hess[i][j];
  }
  return r;
}

Jet2 jet_sub(const Jet2& a, const Jet2& b) { return jet_add(a, jet_neg(b)); }

Jet2 jet_neg(const Jet2& a) {
  Jet2 r(a.dim());
  r.value = -a.value;
  for (std::size_t i = 0; i < r.dim(); ++i) {
    r.grad[i] = -a.grad[i];
    for (std::size_t j = 0; j < r.dim(); ++j) r.hess[i][j] = -a.hess[i][j];
  }
  return r;
}

Jet2 jet_mul(const Jet2& a, const Jet2& b) {
  Jet2 r(a.dim());
  r.value = a.value * b.value;
  for (std::size_t i = 0; i < r.dim(); ++i)
    r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
  for (std::size_t i = 0; i < r.dim(); ++i)
    for (std::size_t j = 0; j < r.dim(); ++j)
      r.hess[i][j] = a.hess[i][j] * b.value + a.grad[i] * b.grad[j] +
                     a.grad[j] * b.grad[i] + a.value * b.hess[i][j];
  return r;
}

Jet2 jet_div(const Jet2& a, const Jet2& b) {
  if (b.value == 0) throw PoleAtPoint();
  // 1/b to second order, then multiply
  Jet2 inv(b.dim());
  Rational w = Rational(1) / b.value;
  inv.value = w;
  for (std::size_t i = 0; i < b.dim(); ++i) inv.grad[i] = -b.grad[i] * w * w;
  for (std::size_t i = 0; i < b.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j)
      inv.hess[i][j] = (Rational(2) * b.grad[i] * b.grad[j] * w - b.hess[i][j]) * w * w;
  return jet_mul(a, inv);
}

namespace {

Jet2 jet_const(std::size_t n, const Rational& c) {
  Jet2 r(n);
  r.value = c;
  return r;
}

Jet2 jet_pow(const Jet2& a, std::uint32_t e) {
  Jet2 r = jet_const(a.dim(), Rational(1));
  Jet2 base = a;
  while (e > 0) {
    if (e & 1u) r = jet_mul(r, base);
    e >>= 1;
    if (e) base = jet_mul(base, base);
  }
  return r;
}

Jet2 jet_of_variable(const std::string& name, const JetPoint& pt) {
  for (std::size_t i = 0; i < pt.variables.size(); ++i) {
    if (pt.variables[i] == name) {
      Jet2 r(pt.variables.size());
      r.value = pt.values[i];
      r.grad[i] = 1;
      return r;
    }
  }
  throw UnknownVariable(name);
}

Jet2 jet_of_atom(const FunctionAtom& a, const JetPoint& pt) {
  std::size_t n = pt.variables.size();
  std::vector<Jet2> args;
  args.reserve(a.args.size());
  for (const auto& arg : a.args) args.push_back(jet_eval(arg, pt));
  Jet2 r(n);
  r.value = sample(pt.samples, a.name, a.index);
  std::vector<Rational> d1(a.args.size(), Rational(0));
  for (std::size_t s = 0; s < a.args.size(); ++s) {
    auto idx = a.index;
    idx[s] += 1;
    d1[s] = sample(pt.samples, a.name, idx);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t s = 0; s < a.args.size(); ++s) r.grad[i] += d1[s] * args[s].grad[i];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Rational h(0);
      for (std::size_t s = 0; s < a.args.size(); ++s) {
        h += d1[s] * args[s].hess[i][j];
        for (std::size_t u = 0; u < a.args.size(); ++u) {
          auto idx = a.index;
          idx[s] += 1;
          idx[u] += 1;
          h += sample(pt.samples, a.name, idx) * args[s].grad[i] * args[u].grad[j];
        }
      }
      r.hess[i][j] = h;
    }
  }
  return r;
}

Jet2 jet_of_poly(const Polynomial& p, const JetPoint& pt) {
  std::size_t n = pt.variables.size();
  std::vector<Jet2> base;
  base.reserve(p.indets().size());
  for (const auto& v : p.indets()) {
    if (std::holds_alternative<std::string>(v))
      base.push_back(jet_of_variable(std::get<std::string>(v), pt));
    else
      base.push_back(jet_of_atom(std::get<FunctionAtom>(v), pt));
  }
  Jet2 acc(n);
  for (const auto& t : p.terms()) {
    Jet2 term = jet_const(n, t.coeff);
    for (std::size_t i = 0; i < t.exps.size(); ++i)
      if (t.exps[i] > 0) term = jet_mul(term, jet_pow(base[i], t.exps[i]));
    acc = jet_add(acc, term);
  }
  return acc;
}

}  // namespace

Jet2 jet_eval(const RationalExpr& e, const JetPoint& point) {
  Jet2 num = jet_of_poly(e.num(), point);
  if (e.is_polynomial()) return num;
  return jet_div(num, jet_of_poly(e.den(), point));
}

Rational evaluate(const RationalExpr& e, const JetPoint& point) {
  return jet_eval(e, point).value;  // exact either way; simplicity over speed
}

namespace {

// first-order view (value + gradient), used for Christoffel jets
struct Jet1 {
  Rational value;
  std::vector<Rational> grad;
  explicit Jet1(std::size_t n) : value(0), grad(n, Rational(0)) {}
};

Jet1 d_of(const Jet2& e, std::size_t i) {
  Jet1 r(e.dim());
  r.value = e.grad[i];
  r.grad = e.hess[i];
  return r;
}

Jet1 view1(const Jet2& e) {
  Jet1 r(e.dim());
  r.value = e.value;
  r.grad = e.grad;
  return r;
}

Jet1 mul1(const Jet1& a, const Jet1& b) {
  Jet1 r(a.grad.size());
  r.value = a.value * b.value;
  for (std::size_t i = 0; i < r.grad.size(); ++i)
    r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
  return r;
}

Jet1 add1(const Jet1& a, const Jet1& b) {
  Jet1 r(a.grad.size());
  r.value = a.value + b.value;
  for (std::size_t i = 0; i < r.grad.size(); ++i) r.grad[i] = a.grad[i] + b.grad[i];
  return r;
}

Jet1 sub1(const Jet1& a, const Jet1& b) {
  Jet1 r(a.grad.size());
  r.value = a.value - b.value;
  for (std::size_t i = 0; i < r.grad.size(); ++i) r.grad[i] = a.grad[i] - b.grad[i];
  return r;
}

Jet1 scale1(const Jet1& a, const Rational& c) {
  Jet1 r = a;
  r.value *= c;
  for (auto& g : r.grad) g *= c;
  return r;
}

// Gauss-Jordan over the jet ring; pivots must have nonzero value part.
std::vector<std::vector<Jet2>> jet_matrix_inverse(std::vector<std::vector<Jet2>> m) {
  std::size_t n = m.size();
  std::size_t dim = m[0][0].dim();
  std::vector<std::vector<Jet2>> inv(n, std::vector<Jet2>(n, Jet2(dim)));
  for (std::size_t i = 0; i < n; ++i) inv[i][i].value = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && m[piv][col].value == 0) ++piv;
    if (piv == n) throw SingularAtPoint();
    std::swap(m[piv], m[col]);
    std::swap(inv[piv], inv[col]);
    Jet2 lead = m[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      m[col][j] = jet_div(m[col][j], lead);
      inv[col][j] = jet_div(inv[col][j], lead);
    }
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col) continue;
      Jet2 factor = m[row][col];
      if (factor.value == 0) {
        bool zero = true;
        for (const auto& g : factor.grad)
          if (g != 0) zero = false;
        for (const auto& hr : factor.hess)
          for (const auto& h : hr)
            if (h != 0) zero = false;
        if (zero) continue;
      }
      for (std::size_t j = 0; j < n; ++j) {
        m[row][j] = jet_sub(m[row][j], jet_mul(factor, m[col][j]));
        inv[row][j] = jet_sub(inv[row][j], jet_mul(factor, inv[col][j]));
      }
    }
  }
  return inv;
}

}  // namespace

CurvaturePoint oracle_curvature(const std::vector<std::vector<RationalExpr>>& g_cov,
                                std::size_t n, const JetPoint& point) {
  std::vector<std::vector<Jet2>> g(n, std::vector<Jet2>(n, Jet2(point.variables.size())));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g[i][j] = jet_eval(g_cov[i][j], point);
  std::vector<std::vector<Jet2>> ginv = jet_matrix_inverse(g);

  std::size_t dim = point.variables.size();
  auto gamma = std::vector<std::vector<std::vector<Jet1>>>(
      n, std::vector<std::vector<Jet1>>(n, std::vector<Jet1>(n, Jet1(dim))));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Jet1 sum(dim);
        for (std::size_t l = 0; l < n; ++l) {
          Jet1 br = add1(d_of(g[j][l], i), sub1(d_of(g[i][l], j), d_of(g[i][j], l)));
          sum = add1(sum, mul1(view1(ginv[k][l]), br));
        }
        gamma[k][i][j] = scale1(sum, Rational(1, 2));
      }
    }
  }

  CurvaturePoint out;
  out.gamma.assign(n, std::vector<std::vector<Rational>>(n, std::vector<Rational>(n, Rational(0))));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out.gamma[k][i][j] = gamma[k][i][j].value;

  // R^l_{kij} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik} + Gamma^l_{im} Gamma^m_{jk}
  //           - Gamma^l_{jm} Gamma^m_{ik}
  out.riemann.assign(
      n, std::vector<std::vector<std::vector<Rational>>>(
             n, std::vector<std::vector<Rational>>(n, std::vector<Rational>(n, Rational(0)))));
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          Rational r = gamma[l][j][k].grad[i] - gamma[l][i][k].grad[j];
          for (std::size_t m = 0; m < n; ++m)
            r += gamma[l][i][m].value * gamma[m][j][k].value -
                 gamma[l][j][m].value * gamma[m][i][k].value;
          out.riemann[l][k][i][j] = r;
        }
      }
    }
  }

  out.lowered.assign(
      n, std::vector<std::vector<std::vector<Rational>>>(
             n, std::vector<std::vector<Rational>>(n, std::vector<Rational>(n, Rational(0)))));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          Rational r(0);
          for (std::size_t m = 0; m < n; ++m) r += g[l][m].value * out.riemann[m][k][i][j];
          out.lowered[l][k][i][j] = r;
        }
  return out;
}

}  // namespace symt
