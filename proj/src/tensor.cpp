#include <algorithm>
#include <set>

#include "symtensor/tensor.hpp"

namespace symt {

Chart::Chart(std::string name_, std::vector<std::string> coords_)
    : name(std::move(name_)), coords(std::move(coords_)) {
  std::set<std::string> seen(coords.begin(), coords.end());
  if (seen.size() != coords.size()) throw Error("chart coordinates must be distinct");
  if (coords.empty()) throw Error("chart must have dimension >= 1");
}

RationalExpr matrix_determinant(const Matrix& m) {
  // fraction-free enough: entries are already field elements
  Matrix a = m;
  std::size_t n = a.size();
  RationalExpr det = RationalExpr::from_int(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col].is_zero()) ++piv;
    if (piv == n) return RationalExpr();
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t row = col + 1; row < n; ++row) {
      if (a[row][col].is_zero()) continue;
      RationalExpr f = a[row][col] / a[col][col];
      for (std::size_t j = col; j < n; ++j) a[row][j] -= f * a[col][j];
    }
  }
  return det;
}

Matrix matrix_inverse(const Matrix& m) {
  Matrix a = m;
  std::size_t n = a.size();
  Matrix inv(n, std::vector<RationalExpr>(n));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = RationalExpr::from_int(1);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col].is_zero()) ++piv;
    if (piv == n) throw SingularMetric();
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    RationalExpr lead = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= lead;
      inv[col][j] /= lead;
    }
    for (std::size_t row = 0; row < n; ++row) {
      if (row == col || a[row][col].is_zero()) continue;
      RationalExpr f = a[row][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[row][j] -= f * a[col][j];
        inv[row][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

Matrix matrix_mul(const Matrix& a, const Matrix& b) {
  std::size_t n = a.size(), m = b[0].size(), k = b.size();
  Matrix r(n, std::vector<RationalExpr>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      RationalExpr s;
      for (std::size_t l = 0; l < k; ++l) s += a[i][l] * b[l][j];
      r[i][j] = s;
    }
  return r;
}

MetricField::MetricField(Chart chart, Variance variance, Matrix components)
    : chart_(std::move(chart)), variance_(variance), comp_(std::move(components)) {
  std::size_t n = chart_.dim();
  if (comp_.size() != n) throw Error("metric size does not match chart dimension");
  for (std::size_t i = 0; i < n; ++i) {
    if (comp_[i].size() != n) throw Error("metric is not square");
    for (std::size_t j = 0; j < i; ++j)
      if (comp_[i][j] != comp_[j][i]) throw Error("metric is not symmetric");
  }
  if (determinant().is_zero()) throw SingularMetric();
}

const RationalExpr& MetricField::determinant() const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->det) cache_->det = matrix_determinant(comp_);
  return *cache_->det;
}

MetricField MetricField::dual() const {
  Matrix inv;
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (!cache_->inverse) cache_->inverse = matrix_inverse(comp_);
    inv = *cache_->inverse;
  }
  return MetricField(chart_, variance_ == Variance::covariant ? Variance::contravariant
                                                              : Variance::covariant,
                     std::move(inv));
}

MetricField MetricField::trusted(Chart chart, Variance variance, Matrix components) {
  MetricField m;
  m.chart_ = std::move(chart);
  m.variance_ = variance;
  m.comp_ = std::move(components);
  return m;
}

MetricField MetricField::trusted(Chart chart, Variance variance, Matrix components,
                                 Matrix inverse) {
  MetricField m = trusted(std::move(chart), variance, std::move(components));
  m.cache_->inverse = std::move(inverse);
  return m;
}

const ConnectionField& metric_connection(const MetricField& g) {
  {
    std::lock_guard<std::mutex> lock(g.cache_->mu);
    if (g.cache_->connection) return *g.cache_->connection;
  }
  ConnectionField c = christoffel(g);  // handles either variance
  std::lock_guard<std::mutex> lock(g.cache_->mu);
  if (!g.cache_->connection) g.cache_->connection = std::move(c);
  return *g.cache_->connection;
}

const CurvatureField& metric_curvature(const MetricField& g) {
  {
    std::lock_guard<std::mutex> lock(g.cache_->mu);
    if (g.cache_->curvature) return *g.cache_->curvature;
  }
  CurvatureField r = riemann(metric_connection(g));
  std::lock_guard<std::mutex> lock(g.cache_->mu);
  if (!g.cache_->curvature) g.cache_->curvature = std::move(r);
  return *g.cache_->curvature;
}

ConnectionField conformal_connection_shift(const Chart& chart, const Matrix& g_cov,
                                           const Matrix& g_con, const ConnectionField& base,
                                           const RationalExpr& omega) {
  std::size_t n = chart.dim();
  OneForm w = differential(chart, omega);
  for (auto& e : w.comp) e /= omega;
  std::vector<RationalExpr> wup(n);
  for (std::size_t k = 0; k < n; ++k) {
    RationalExpr s;
    for (std::size_t l = 0; l < n; ++l) s += g_con[k][l] * w.comp[l];
    wup[k] = s;
  }
  ConnectionField out{chart, std::vector<Matrix>(n, Matrix(n, std::vector<RationalExpr>(n)))};
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        RationalExpr v = base.gamma[k][i][j];
        if (k == i) v += w.comp[j];
        if (k == j) v += w.comp[i];
        v -= g_cov[i][j] * wup[k];
        out.gamma[k][i][j] = v;
        out.gamma[k][j][i] = v;
      }
  return out;
}

MetricField MetricField::covariant() const {
  return variance_ == Variance::covariant ? *this : dual();
}

MetricField MetricField::contravariant() const {
  return variance_ == Variance::contravariant ? *this : dual();
}

MetricField MetricField::scaled(const RationalExpr& factor) const {
  if (factor.is_zero()) throw ZeroConformalFactor();
  Matrix m = comp_;
  for (auto& row : m)
    for (auto& e : row) e *= factor;
  // scaling by a nonzero rational function preserves symmetry and
  // nondegeneracy, so the checked constructor is unnecessary
  return trusted(chart_, variance_, std::move(m));
}

bool CurvatureField::is_zero() const {
  for (const auto& a : r)
    for (const auto& b : a)
      for (const auto& c : b)
        for (const auto& e : c)
          if (!e.is_zero()) return false;
  return true;
}

OneForm lower(const MetricField& g, const VectorField& x) {
  const MetricField gc = g.covariant();
  std::size_t n = g.dim();
  OneForm a{x.chart, std::vector<RationalExpr>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    RationalExpr s;
    for (std::size_t j = 0; j < n; ++j) s += gc.at(i, j) * x.comp[j];
    a.comp[i] = s;
  }
  return a;
}

VectorField raise(const MetricField& g, const OneForm& a) {
  const MetricField gup = g.contravariant();
  std::size_t n = g.dim();
  VectorField x{a.chart, std::vector<RationalExpr>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    RationalExpr s;
    for (std::size_t j = 0; j < n; ++j) s += gup.at(i, j) * a.comp[j];
    x.comp[i] = s;
  }
  return x;
}

RationalExpr inner_form(const MetricField& g, const OneForm& a, const OneForm& b) {
  const MetricField gc = g.contravariant();
  RationalExpr s;
  for (std::size_t i = 0; i < g.dim(); ++i)
    for (std::size_t j = 0; j < g.dim(); ++j) s += gc.at(i, j) * a.comp[i] * b.comp[j];
  return s;
}

RationalExpr inner_vec(const MetricField& g, const VectorField& x, const VectorField& y) {
  const MetricField gc = g.covariant();
  RationalExpr s;
  for (std::size_t i = 0; i < g.dim(); ++i)
    for (std::size_t j = 0; j < g.dim(); ++j) s += gc.at(i, j) * x.comp[i] * y.comp[j];
  return s;
}

OneForm differential(const Chart& chart, const RationalExpr& f) {
  OneForm a{chart, {}};
  a.comp.reserve(chart.dim());
  for (const auto& c : chart.coords) a.comp.push_back(f.derivative(c));
  return a;
}

RationalExpr apply_form(const OneForm& a, const VectorField& x) {
  RationalExpr s;
  for (std::size_t i = 0; i < a.comp.size(); ++i) s += a.comp[i] * x.comp[i];
  return s;
}

RationalExpr direct(const VectorField& x, const RationalExpr& f) {
  RationalExpr s;
  for (std::size_t i = 0; i < x.comp.size(); ++i)
    s += x.comp[i] * f.derivative(x.chart.coords[i]);
  return s;
}

ConnectionField christoffel(const MetricField& g) {
  const MetricField gc = g.covariant();
  const MetricField gi = gc.dual();
  const Chart& chart = g.chart();
  std::size_t n = chart.dim();
  ConnectionField c{chart, std::vector<Matrix>(n, Matrix(n, std::vector<RationalExpr>(n)))};
  // dg[l][i][j] = d_i g_{jl}
  std::vector<Matrix> dg(n, Matrix(n, std::vector<RationalExpr>(n)));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        dg[l][i][j] = gc.at(j, l).derivative(chart.coords[i]);
  RationalExpr half = RationalExpr::constant(Rational(1, 2));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        RationalExpr s;
        for (std::size_t l = 0; l < n; ++l)
          s += gi.at(k, l) * (dg[l][i][j] + dg[l][j][i] - gc.at(i, j).derivative(chart.coords[l]));
        c.gamma[k][i][j] = half * s;
        c.gamma[k][j][i] = c.gamma[k][i][j];
      }
  return c;
}

CurvatureField riemann(const ConnectionField& c) {
  const Chart& chart = c.chart;
  std::size_t n = chart.dim();
  CurvatureField out{chart,
                     std::vector<std::vector<Matrix>>(
                         n, std::vector<Matrix>(n, Matrix(n, std::vector<RationalExpr>(n))))};
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) {
          RationalExpr r = c.gamma[l][j][k].derivative(chart.coords[i]) -
                           c.gamma[l][i][k].derivative(chart.coords[j]);
          for (std::size_t m = 0; m < n; ++m)
            r += c.gamma[l][i][m] * c.gamma[m][j][k] - c.gamma[l][j][m] * c.gamma[m][i][k];
          out.r[l][k][i][j] = r;
          out.r[l][k][j][i] = -r;
        }
  return out;
}

std::vector<std::vector<Matrix>> lower_curvature(const MetricField& g, const CurvatureField& rr) {
  const MetricField gc = g.covariant();
  std::size_t n = g.dim();
  std::vector<std::vector<Matrix>> low(
      n, std::vector<Matrix>(n, Matrix(n, std::vector<RationalExpr>(n))));
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          RationalExpr s;
          for (std::size_t m = 0; m < n; ++m) s += gc.at(l, m) * rr.r[m][k][i][j];
          low[l][k][i][j] = s;
        }
  return low;
}

bool expr_is_chart_constant(const RationalExpr& e, const Chart& chart) {
  for (const auto& c : chart.coords)
    if (e.depends_on_variable(c)) return false;
  return true;
}

std::string witness_entry(const std::string& label, const RationalExpr& value) {
  return label + " = " + to_string(value);
}

std::optional<RationalExpr> constant_sectional_curvature(const MetricField& g) {
  const MetricField gc = g.covariant();
  const Chart& chart = g.chart();
  std::size_t n = chart.dim();
  const CurvatureField& rr = metric_curvature(gc);
  auto low = lower_curvature(gc, rr);

  auto bracket = [&](std::size_t l, std::size_t k, std::size_t i, std::size_t j) {
    return gc.at(l, i) * gc.at(k, j) - gc.at(l, j) * gc.at(k, i);
  };

  // candidate s from the first component with a nonzero bracket
  std::optional<RationalExpr> s;
  for (std::size_t l = 0; l < n && !s; ++l)
    for (std::size_t k = 0; k < n && !s; ++k)
      for (std::size_t i = 0; i < n && !s; ++i)
        for (std::size_t j = 0; j < n && !s; ++j) {
          RationalExpr b = bracket(l, k, i, j);
          if (!b.is_zero()) s = low[l][k][i][j] / b;
        }
  if (!s) {
    // degenerate shape space (dimension one): flat means s = 0
    return rr.is_zero() ? std::optional<RationalExpr>(RationalExpr()) : std::nullopt;
  }
  if (!expr_is_chart_constant(*s, chart)) return std::nullopt;
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (low[l][k][i][j] != *s * bracket(l, k, i, j)) return std::nullopt;
  return s;
}

Matrix lie_derivative_metric(const VectorField& z, const MetricField& g) {
  if (!(z.chart == g.chart())) throw Error("vector field and metric on different charts");
  const Chart& chart = g.chart();
  std::size_t n = chart.dim();
  Matrix out(n, std::vector<RationalExpr>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      RationalExpr s;
      for (std::size_t k = 0; k < n; ++k)
        s += z.comp[k] * g.at(i, j).derivative(chart.coords[k]);
      if (g.variance() == Variance::covariant) {
        for (std::size_t k = 0; k < n; ++k)
          s += g.at(k, j) * z.comp[k].derivative(chart.coords[i]) +
               g.at(i, k) * z.comp[k].derivative(chart.coords[j]);
      } else {
        for (std::size_t k = 0; k < n; ++k)
          s -= g.at(k, j) * z.comp[i].derivative(chart.coords[k]) +
               g.at(i, k) * z.comp[j].derivative(chart.coords[k]);
      }
      out[i][j] = s;
    }
  }
  return out;
}

std::optional<RationalExpr> conformal_factor(const VectorField& z, const MetricField& g) {
  std::size_t n = g.dim();
  Matrix lie = lie_derivative_metric(z, g);
  std::optional<RationalExpr> p;
  for (std::size_t i = 0; i < n && !p; ++i)
    for (std::size_t j = 0; j < n && !p; ++j)
      if (!g.at(i, j).is_zero()) p = lie[i][j] / g.at(i, j);
  if (!p) return std::nullopt;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (lie[i][j] != *p * g.at(i, j)) return std::nullopt;
  if (g.variance() == Variance::contravariant) p = -*p;
  return p;
}

OneForm covariant_derivative_oneform(const ConnectionField& c, const VectorField& x,
                                     const OneForm& a) {
  const Chart& chart = c.chart;
  std::size_t n = chart.dim();
  OneForm out{chart, std::vector<RationalExpr>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    RationalExpr s;
    for (std::size_t i = 0; i < n; ++i) {
      RationalExpr inner = a.comp[j].derivative(chart.coords[i]);
      for (std::size_t k = 0; k < n; ++k) inner -= c.gamma[k][i][j] * a.comp[k];
      s += x.comp[i] * inner;
    }
    out.comp[j] = s;
  }
  return out;
}

Matrix nabla_endomorphism(const ConnectionField& c, const VectorField& e) {
  const Chart& chart = c.chart;
  std::size_t n = chart.dim();
  Matrix m(n, std::vector<RationalExpr>(n));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j) {
      RationalExpr s = e.comp[k].derivative(chart.coords[j]);
      for (std::size_t mm = 0; mm < n; ++mm) s += c.gamma[k][j][mm] * e.comp[mm];
      m[k][j] = s;
    }
  return m;
}

std::optional<RationalExpr> proportional_to_identity(const Matrix& m) {
  std::size_t n = m.size();
  RationalExpr f = m[0][0];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        if (m[i][j] != f) return std::nullopt;
      } else if (!m[i][j].is_zero()) {
        return std::nullopt;
      }
    }
  return f;
}

MetricField conformal_rescale(const MetricField& g, const RationalExpr& omega) {
  if (omega.is_zero()) throw ZeroConformalFactor();
  RationalExpr o2 = omega * omega;
  return g.variance() == Variance::covariant ? g.scaled(o2) : g.scaled(RationalExpr::from_int(1) / o2);
}

namespace {

// coordinate basis fields
VectorField basis_vector(const Chart& chart, std::size_t i) {
  VectorField v{chart, std::vector<RationalExpr>(chart.dim())};
  v.comp[i] = RationalExpr::from_int(1);
  return v;
}

OneForm basis_form(const Chart& chart, std::size_t j) {
  OneForm a{chart, std::vector<RationalExpr>(chart.dim())};
  a.comp[j] = RationalExpr::from_int(1);
  return a;
}

OneForm form_scale(const OneForm& a, const RationalExpr& c) {
  OneForm r = a;
  for (auto& e : r.comp) e *= c;
  return r;
}

OneForm form_sub(const OneForm& a, const OneForm& b) {
  OneForm r = a;
  for (std::size_t i = 0; i < r.comp.size(); ++i) r.comp[i] -= b.comp[i];
  return r;
}

OneForm form_add(const OneForm& a, const OneForm& b) {
  OneForm r = a;
  for (std::size_t i = 0; i < r.comp.size(); ++i) r.comp[i] += b.comp[i];
  return r;
}

}  // namespace

Report scaled_connection_difference(const MetricField& g_in, const MetricField& gt_in,
                                    const RationalExpr& omega) {
  if (omega.is_zero()) throw ZeroConformalFactor();
  Report rep;
  MetricField g = g_in.covariant();
  MetricField gt = gt_in.covariant();
  MetricField h = conformal_rescale(g, omega);
  MetricField ht = conformal_rescale(gt, omega);
  const Chart& chart = g.chart();
  std::size_t n = chart.dim();

  ConnectionField cg = christoffel(g);
  ConnectionField cgt = christoffel(gt);
  ConnectionField ch = christoffel(h);
  ConnectionField cht = christoffel(ht);

  OneForm dlog = differential(chart, omega);
  for (auto& e : dlog.comp) e /= omega;  // d(omega)/omega

  bool conn_ok = true, diff_ok = true;
  std::string conn_witness, diff_witness;
  for (std::size_t i = 0; i < n && (conn_ok || diff_ok); ++i) {
    VectorField X = basis_vector(chart, i);
    OneForm gX = lower(g, X);
    OneForm gtX = lower(gt, X);
    for (std::size_t j = 0; j < n; ++j) {
      OneForm alpha = basis_form(chart, j);
      OneForm lhs = covariant_derivative_oneform(ch, X, alpha);
      OneForm base = covariant_derivative_oneform(cg, X, alpha);
      // nabla^h_X a = nabla^g_X a - (dW/W)(X) a - a(X) dW/W + g*(a, dW/W) g(X)
      OneForm rhs = form_sub(base, form_scale(alpha, apply_form(dlog, X)));
      rhs = form_sub(rhs, form_scale(dlog, apply_form(alpha, X)));
      rhs = form_add(rhs, form_scale(gX, inner_form(g, alpha, dlog)));
      if (conn_ok) {
        for (std::size_t m = 0; m < n; ++m) {
          if (lhs.comp[m] != rhs.comp[m]) {
            conn_ok = false;
            conn_witness = witness_entry("component (X=" + chart.coords[i] + ", a=d" +
                                             chart.coords[j] + ")[" + chart.coords[m] + "]",
                                         lhs.comp[m] - rhs.comp[m]);
            break;
          }
        }
      }
      // difference identity between the scaled and the unscaled pairs
      OneForm dl = form_sub(covariant_derivative_oneform(cht, X, alpha),
                            covariant_derivative_oneform(ch, X, alpha));
      OneForm dr = form_sub(covariant_derivative_oneform(cgt, X, alpha),
                            covariant_derivative_oneform(cg, X, alpha));
      dr = form_add(dr, form_scale(gtX, inner_form(gt, alpha, dlog)));
      dr = form_sub(dr, form_scale(gX, inner_form(g, alpha, dlog)));
      if (diff_ok) {
        for (std::size_t m = 0; m < n; ++m) {
          if (dl.comp[m] != dr.comp[m]) {
            diff_ok = false;
            diff_witness = witness_entry("component (X=" + chart.coords[i] + ", a=d" +
                                             chart.coords[j] + ")[" + chart.coords[m] + "]",
                                         dl.comp[m] - dr.comp[m]);
            break;
          }
        }
      }
    }
  }
  rep.add("conformal-connection/scaled-derivative-formula", conn_ok, conn_witness);
  rep.add("conformal-connection/pair-difference-identity", diff_ok, diff_witness);
  return rep;
}

Report lie_derivative_connection(const VectorField& z, const MetricField& g_in) {
  MetricField g = g_in.covariant();
  auto p = conformal_factor(z, g);
  if (!p) throw NotConformal();
  const Chart& chart = g.chart();
  std::size_t n = chart.dim();
  ConnectionField cg = christoffel(g);
  OneForm dp = differential(chart, *p);

  auto lie_form = [&](const OneForm& b) {
    OneForm r{chart, std::vector<RationalExpr>(n)};
    for (std::size_t j = 0; j < n; ++j) {
      RationalExpr s;
      for (std::size_t k = 0; k < n; ++k)
        s += z.comp[k] * b.comp[j].derivative(chart.coords[k]) +
             b.comp[k] * z.comp[k].derivative(chart.coords[j]);
      r.comp[j] = s;
    }
    return r;
  };
  auto lie_vec = [&](const VectorField& x) {
    VectorField r{chart, std::vector<RationalExpr>(n)};
    for (std::size_t k = 0; k < n; ++k) {
      RationalExpr s;
      for (std::size_t m = 0; m < n; ++m)
        s += z.comp[m] * x.comp[k].derivative(chart.coords[m]) -
             x.comp[m] * z.comp[k].derivative(chart.coords[m]);
      r.comp[k] = s;
    }
    return r;
  };

  Report rep;
  bool ok = true;
  std::string witness;
  RationalExpr half = RationalExpr::constant(Rational(1, 2));
  for (std::size_t i = 0; i < n && ok; ++i) {
    VectorField X = basis_vector(chart, i);
    OneForm gX = lower(g, X);
    for (std::size_t j = 0; j < n && ok; ++j) {
      OneForm alpha = basis_form(chart, j);
      // (L_Z nabla)_X a = L_Z(nabla_X a) - nabla_{[Z,X]} a - nabla_X (L_Z a)
      OneForm lhs = lie_form(covariant_derivative_oneform(cg, X, alpha));
      lhs = form_sub(lhs, covariant_derivative_oneform(cg, lie_vec(X), alpha));
      lhs = form_sub(lhs, covariant_derivative_oneform(cg, X, lie_form(alpha)));
      OneForm rhs = form_scale(alpha, -apply_form(dp, X));
      rhs = form_sub(rhs, form_scale(dp, apply_form(alpha, X)));
      rhs = form_add(rhs, form_scale(gX, inner_form(g, alpha, dp)));
      rhs = form_scale(rhs, half);
      for (std::size_t m = 0; m < n; ++m) {
        if (lhs.comp[m] != rhs.comp[m]) {
          ok = false;
          witness = witness_entry("component (X=" + chart.coords[i] + ", a=d" + chart.coords[j] +
                                      ")[" + chart.coords[m] + "]",
                                  lhs.comp[m] - rhs.comp[m]);
          break;
        }
      }
    }
  }
  rep.add("conformal-field/lie-derivative-of-connection", ok, witness,
          "factor p = " + to_string(*p));
  return rep;
}

}  // namespace symt
