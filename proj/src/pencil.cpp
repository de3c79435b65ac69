#include <sstream>

#include "symtensor/pencil.hpp"

namespace symt {

struct MetricPair::Cache {
  std::mutex mu;
  std::optional<MetricField> g_cov, g_con, gt_cov, gt_con, lambda_cov;
  std::optional<ConnectionField> gamma_g, gamma_gt, gamma_lambda;
  std::optional<CurvatureField> r_g, r_gt, r_lambda;
};

MetricPair::MetricPair(MetricField g, MetricField gt)
    : g_(std::move(g)), gt_(std::move(gt)), cache_(std::make_shared<Cache>()) {
  if (!(g_.chart() == gt_.chart())) throw Error("pencil metrics live on different charts");
  for (const auto& c : g_.chart().coords)
    if (c == kPencilParameter)
      throw Error("chart coordinate collides with the pencil parameter name");
  // the pencil g* + lambda gt* must stay invertible as a rational matrix
  RationalExpr lam = RationalExpr::variable(kPencilParameter);
  Matrix pencil = g_.contravariant().components();
  Matrix tilt = gt_.contravariant().components();
  for (std::size_t i = 0; i < pencil.size(); ++i)
    for (std::size_t j = 0; j < pencil.size(); ++j) pencil[i][j] += lam * tilt[i][j];
  if (matrix_determinant(pencil).is_zero()) throw SingularMetric();
}

const MetricField& MetricPair::g_cov() const {
  if (scale_base_) {
    const MetricField& bc = scale_base_->g_cov();
    const MetricField& bu = scale_base_->g_con();
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (!cache_->g_cov) {
      RationalExpr w2 = scale_omega_ * scale_omega_;
      Matrix cov = bc.components(), con = bu.components();
      for (auto& row : cov)
        for (auto& e : row) e *= w2;
      for (auto& row : con)
        for (auto& e : row) e /= w2;
      cache_->g_cov = MetricField::trusted(g_.chart(), Variance::covariant, std::move(cov),
                                           std::move(con));
    }
    return *cache_->g_cov;
  }
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->g_cov) cache_->g_cov = g_.covariant();
  return *cache_->g_cov;
}
const MetricField& MetricPair::g_con() const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->g_con) cache_->g_con = g_.contravariant();
  return *cache_->g_con;
}
const MetricField& MetricPair::gt_cov() const {
  if (scale_base_) {
    const MetricField& bc = scale_base_->gt_cov();
    const MetricField& bu = scale_base_->gt_con();
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (!cache_->gt_cov) {
      RationalExpr w2 = scale_omega_ * scale_omega_;
      Matrix cov = bc.components(), con = bu.components();
      for (auto& row : cov)
        for (auto& e : row) e *= w2;
      for (auto& row : con)
        for (auto& e : row) e /= w2;
      cache_->gt_cov = MetricField::trusted(gt_.chart(), Variance::covariant, std::move(cov),
                                            std::move(con));
    }
    return *cache_->gt_cov;
  }
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->gt_cov) cache_->gt_cov = gt_.covariant();
  return *cache_->gt_cov;
}
const MetricField& MetricPair::gt_con() const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->gt_con) cache_->gt_con = gt_.contravariant();
  return *cache_->gt_con;
}

const ConnectionField& MetricPair::gamma_g() const {
  if (scale_base_) {
    const ConnectionField& base = scale_base_->gamma_g();
    const MetricField& bc = scale_base_->g_cov();
    const MetricField& bu = scale_base_->g_con();
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (!cache_->gamma_g)
      cache_->gamma_g = conformal_connection_shift(g_.chart(), bc.components(), bu.components(),
                                                   base, scale_omega_);
    return *cache_->gamma_g;
  }
  const MetricField& g = g_cov();
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->gamma_g) cache_->gamma_g = christoffel(g);
  return *cache_->gamma_g;
}
const ConnectionField& MetricPair::gamma_gt() const {
  if (scale_base_) {
    const ConnectionField& base = scale_base_->gamma_gt();
    const MetricField& bc = scale_base_->gt_cov();
    const MetricField& bu = scale_base_->gt_con();
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (!cache_->gamma_gt)
      cache_->gamma_gt = conformal_connection_shift(gt_.chart(), bc.components(), bu.components(),
                                                    base, scale_omega_);
    return *cache_->gamma_gt;
  }
  const MetricField& g = gt_cov();
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->gamma_gt) cache_->gamma_gt = christoffel(g);
  return *cache_->gamma_gt;
}

const MetricField& MetricPair::lambda_cov() const {
  if (scale_base_) {
    const MetricField& base = scale_base_->lambda_cov();
    Matrix base_con = base.dual().components();
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (!cache_->lambda_cov) {
      RationalExpr w2 = scale_omega_ * scale_omega_;
      Matrix cov = base.components();
      for (auto& row : cov)
        for (auto& e : row) e *= w2;
      for (auto& row : base_con)
        for (auto& e : row) e /= w2;
      cache_->lambda_cov = MetricField::trusted(g_.chart(), Variance::covariant, std::move(cov),
                                                std::move(base_con));
    }
    return *cache_->lambda_cov;
  }
  const MetricField& gup = g_con();
  const MetricField& gtup = gt_con();
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->lambda_cov) {
    RationalExpr lam = RationalExpr::variable(kPencilParameter);
    Matrix pencil = gup.components();
    for (std::size_t i = 0; i < pencil.size(); ++i)
      for (std::size_t j = 0; j < pencil.size(); ++j) pencil[i][j] += lam * gtup.at(i, j);
    MetricField con(g_.chart(), Variance::contravariant, pencil);
    cache_->lambda_cov = MetricField::trusted(g_.chart(), Variance::covariant,
                                              con.dual().components(), std::move(pencil));
  }
  return *cache_->lambda_cov;
}

const ConnectionField& MetricPair::gamma_lambda() const {
  if (scale_base_) {
    const ConnectionField& base = scale_base_->gamma_lambda();
    const MetricField& bcov = scale_base_->lambda_cov();
    Matrix bcon = bcov.dual().components();
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (!cache_->gamma_lambda)
      cache_->gamma_lambda = conformal_connection_shift(g_.chart(), bcov.components(), bcon,
                                                        base, scale_omega_);
    return *cache_->gamma_lambda;
  }
  const MetricField& g = lambda_cov();
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->gamma_lambda) cache_->gamma_lambda = christoffel(g);
  return *cache_->gamma_lambda;
}

MetricPair MetricPair::scaled(const RationalExpr& omega) const {
  if (omega.is_zero()) throw ZeroConformalFactor();
  MetricPair out;
  out.g_ = conformal_rescale(g_, omega);
  out.gt_ = conformal_rescale(gt_, omega);
  out.cache_ = std::make_shared<Cache>();
  out.scale_base_ = std::make_shared<MetricPair>(*this);
  out.scale_omega_ = omega;
  return out;
}

const CurvatureField& MetricPair::riemann_g() const {
  const ConnectionField& c = gamma_g();
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->r_g) cache_->r_g = riemann(c);
  return *cache_->r_g;
}
const CurvatureField& MetricPair::riemann_gt() const {
  const ConnectionField& c = gamma_gt();
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->r_gt) cache_->r_gt = riemann(c);
  return *cache_->r_gt;
}
const CurvatureField& MetricPair::riemann_lambda() const {
  const ConnectionField& c = gamma_lambda();
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->r_lambda) cache_->r_lambda = riemann(c);
  return *cache_->r_lambda;
}

namespace {

struct ComponentCheck {
  bool ok = true;
  std::string witness;
  const RuleSet* rules = nullptr;
  void expect_zero(const RationalExpr& e, const std::string& label) {
    if (!ok) return;
    RationalExpr r = (rules && !rules->empty()) ? apply_rules(e, *rules) : e;
    if (!r.is_zero()) {
      ok = false;
      witness = witness_entry(label, r);
    }
  }
};

std::string idx(std::initializer_list<std::size_t> is) {
  std::string s = "[";
  bool first = true;
  for (auto i : is) {
    if (!first) s += ",";
    s += std::to_string(i + 1);
    first = false;
  }
  return s + "]";
}

}  // namespace

MultiplicationTable circ_multiplication(const MetricPair& p) {
  std::size_t n = p.dim();
  const Matrix& gup = p.g_con().components();
  const ConnectionField& cg = p.gamma_g();
  const ConnectionField& cgt = p.gamma_gt();
  MultiplicationTable t{p.chart(), Space::cotangent,
                        std::vector<Matrix>(n, Matrix(n, std::vector<RationalExpr>(n)))};
  // (dx^i o dx^j)_m = g^{ik} (Gammat^j_{km} - Gamma^j_{km})
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t m = 0; m < n; ++m) {
        RationalExpr s;
        for (std::size_t k = 0; k < n; ++k)
          s += gup[i][k] * (cgt.gamma[j][k][m] - cg.gamma[j][k][m]);
        t.c[i][j][m] = s;
      }
  return t;
}

std::vector<Matrix> nijenhuis(const EndomorphismField& k) {
  const Chart& chart = k.chart;
  std::size_t n = chart.dim();
  std::vector<Matrix> out(n, Matrix(n, std::vector<RationalExpr>(n)));
  // dK[a][j][b] = d_a K^b_j
  std::vector<Matrix> dK(n, Matrix(n, std::vector<RationalExpr>(n)));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t b = 0; b < n; ++b) dK[a][j][b] = k.comp[b][j].derivative(chart.coords[a]);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        RationalExpr s;
        for (std::size_t a = 0; a < n; ++a)
          s += -k.comp[a][i] * dK[a][j][l] + k.comp[a][j] * dK[a][i][l] -
               k.comp[l][a] * dK[j][i][a] + k.comp[l][a] * dK[i][j][a];
        out[l][i][j] = s;
      }
  return out;
}

EndomorphismField pair_endomorphism(const MetricPair& p) {
  std::size_t n = p.dim();
  const Matrix& gup = p.g_con().components();
  const Matrix& gtdown = p.gt_cov().components();
  EndomorphismField k{p.chart(), Matrix(n, std::vector<RationalExpr>(n))};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      RationalExpr s;
      for (std::size_t m = 0; m < n; ++m) s += gup[i][m] * gtdown[m][j];
      k.comp[i][j] = s;
    }
  return k;
}

Report is_almost_compatible(const MetricPair& p, const RuleSet& rules) {
  Report rep;
  std::size_t n = p.dim();

  ComponentCheck nj;
  nj.rules = &rules;
  {
    auto N = nijenhuis(pair_endomorphism(p));
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          nj.expect_zero(N[l][i][j], "N" + idx({l, i, j}));
  }
  rep.add("pencil/almost-compatible/nijenhuis-vanishes", nj.ok, nj.witness);

  ComponentCheck lin;
  lin.rules = &rules;
  {
    RationalExpr lam = RationalExpr::variable(kPencilParameter);
    const Matrix& gup = p.g_con().components();
    const Matrix& gtup = p.gt_con().components();
    Matrix glup = p.lambda_cov().dual().components();
    const ConnectionField& cg = p.gamma_g();
    const ConnectionField& cgt = p.gamma_gt();
    const ConnectionField& cl = p.gamma_lambda();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          RationalExpr lhs, rhs;
          for (std::size_t m = 0; m < n; ++m) {
            lhs -= glup[m][k] * cl.gamma[j][i][m];
            rhs -= gup[m][k] * cg.gamma[j][i][m] + lam * gtup[m][k] * cgt.gamma[j][i][m];
          }
          lin.expect_zero(lhs - rhs, "split" + idx({i, j, k}));
        }
  }
  rep.add("pencil/almost-compatible/lambda-connection-split", lin.ok, lin.witness);
  rep.add("pencil/almost-compatible/routes-agree", nj.ok == lin.ok,
          nj.ok == lin.ok ? "" : "nijenhuis and pencil-connection routes disagree");
  return rep;
}

Report check_auxiliary_identities(const MetricPair& p, const RuleSet& rules) {
  Report rep;
  Report pre = is_almost_compatible(p, rules);
  if (!pre.all_passed()) {
    rep.add_skip("pencil/auxiliary/exchange-relation", "pair is not almost compatible");
    rep.add_skip("pencil/auxiliary/circ-adjoint-invariance", "pair is not almost compatible");
    return rep;
  }
  std::size_t n = p.dim();
  const Chart& chart = p.chart();
  const ConnectionField& cg = p.gamma_g();
  const ConnectionField& cgt = p.gamma_gt();
  const Matrix& gup = p.g_con().components();
  const Matrix& gtup = p.gt_con().components();

  auto basis_form = [&](std::size_t j) {
    OneForm a{chart, std::vector<RationalExpr>(n)};
    a.comp[j] = RationalExpr::from_int(1);
    return a;
  };

  ComponentCheck ex;
  ex.rules = &rules;
  for (std::size_t c = 0; c < n; ++c) {
    VectorField gt_c{chart, std::vector<RationalExpr>(n)};
    VectorField g_c{chart, std::vector<RationalExpr>(n)};
    for (std::size_t m = 0; m < n; ++m) {
      gt_c.comp[m] = gtup[c][m];
      g_c.comp[m] = gup[c][m];
    }
    for (std::size_t a = 0; a < n; ++a) {
      OneForm alpha = basis_form(a);
      OneForm dgt = covariant_derivative_oneform(cgt, gt_c, alpha);
      OneForm dg = covariant_derivative_oneform(cg, gt_c, alpha);
      OneForm dgt2 = covariant_derivative_oneform(cgt, g_c, alpha);
      OneForm dg2 = covariant_derivative_oneform(cg, g_c, alpha);
      for (std::size_t k = 0; k < n; ++k) {
        RationalExpr lhs, rhs;
        for (std::size_t m = 0; m < n; ++m) {
          lhs += gup[k][m] * (dgt.comp[m] - dg.comp[m]);
          rhs += gtup[k][m] * (dgt2.comp[m] - dg2.comp[m]);
        }
        ex.expect_zero(lhs - rhs, "exchange" + idx({c, a, k}));
      }
    }
  }
  rep.add("pencil/auxiliary/exchange-relation", ex.ok, ex.witness);

  ComponentCheck inv;
  inv.rules = &rules;
  {
    MultiplicationTable circ = circ_multiplication(p);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c) {
          RationalExpr lhs, rhs;
          for (std::size_t m = 0; m < n; ++m) {
            lhs += gtup[m][c] * circ.c[a][b][m];
            rhs += gtup[a][m] * circ.c[c][b][m];
          }
          inv.expect_zero(lhs - rhs, "invariance" + idx({a, b, c}));
        }
  }
  rep.add("pencil/auxiliary/circ-adjoint-invariance", inv.ok, inv.witness);
  return rep;
}

Report is_compatible(const MetricPair& p, const RuleSet& rules) {
  Report rep;
  Report pre = is_almost_compatible(p, rules);
  if (!pre.all_passed()) {
    rep.add_skip("pencil/compatible/lambda-curvature-split", "pair is not almost compatible");
    rep.add_skip("pencil/compatible/gradient-exchange-symmetry", "pair is not almost compatible");
    rep.add_skip("pencil/compatible/circ-associator-symmetry", "pair is not almost compatible");
    rep.add_skip("pencil/compatible/routes-agree", "pair is not almost compatible");
    return rep;
  }
  std::size_t n = p.dim();
  const Chart& chart = p.chart();

  ComponentCheck curv;
  curv.rules = &rules;
  {
    RationalExpr lam = RationalExpr::variable(kPencilParameter);
    const CurvatureField& rl = p.riemann_lambda();
    const CurvatureField& rg = p.riemann_g();
    const CurvatureField& rgt = p.riemann_gt();
    const Matrix& gup = p.g_con().components();
    const Matrix& gtup = p.gt_con().components();
    Matrix glup = p.lambda_cov().dual().components();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          for (std::size_t k = 0; k < n; ++k) {
            RationalExpr lhs, rhs;
            for (std::size_t m = 0; m < n; ++m) {
              lhs -= glup[k][m] * rl.r[a][m][i][j];
              rhs -= gup[k][m] * rg.r[a][m][i][j] + lam * gtup[k][m] * rgt.r[a][m][i][j];
            }
            curv.expect_zero(lhs - rhs, "curvature-split" + idx({a, i, j, k}));
          }
  }
  rep.add("pencil/compatible/lambda-curvature-split", curv.ok, curv.witness);

  ComponentCheck ex;
  ex.rules = &rules;
  {
    const ConnectionField& cg = p.gamma_g();
    const ConnectionField& cgt = p.gamma_gt();
    const Matrix& gup = p.g_con().components();
    // D[i][a] = nabla^gt_{e_i} dx^a - nabla^g_{e_i} dx^a, as component vectors
    std::vector<Matrix> D(n, Matrix(n, std::vector<RationalExpr>(n)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t m = 0; m < n; ++m)
          D[i][a][m] = cg.gamma[a][i][m] - cgt.gamma[a][i][m];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b) {
            RationalExpr lhs, rhs;
            for (std::size_t s = 0; s < n; ++s)
              for (std::size_t t = 0; t < n; ++t) {
                lhs += gup[s][t] * D[i][a][s] * D[j][b][t];
                rhs += gup[s][t] * D[j][a][s] * D[i][b][t];
              }
            ex.expect_zero(lhs - rhs, "gradient-exchange" + idx({i, j, a, b}));
          }
  }
  rep.add("pencil/compatible/gradient-exchange-symmetry", ex.ok, ex.witness);

  ComponentCheck assoc;
  assoc.rules = &rules;
  {
    MultiplicationTable circ = circ_multiplication(p);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c)
          for (std::size_t l = 0; l < n; ++l) {
            RationalExpr lhs, rhs;
            for (std::size_t m = 0; m < n; ++m) {
              lhs += circ.c[a][b][m] * circ.c[m][c][l];
              rhs += circ.c[a][c][m] * circ.c[m][b][l];
            }
            assoc.expect_zero(lhs - rhs, "associator" + idx({a, b, c, l}));
          }
  }
  rep.add("pencil/compatible/circ-associator-symmetry", assoc.ok, assoc.witness);

  bool agree = (curv.ok == ex.ok) && (ex.ok == assoc.ok);
  rep.add("pencil/compatible/routes-agree", agree,
          agree ? "" : "the three compatibility formulations disagree");
  return rep;
}

Report is_compatible_connection_level(const MetricPair& p, const RuleSet& rules) {
  Report rep;
  std::size_t n = p.dim();

  ComponentCheck nj;
  nj.rules = &rules;
  {
    auto N = nijenhuis(pair_endomorphism(p));
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          nj.expect_zero(N[l][i][j], "N" + idx({l, i, j}));
  }
  rep.add("pencil/almost-compatible/nijenhuis-vanishes", nj.ok, nj.witness);

  // clearing denominators first turns both remaining formulations into
  // plain polynomial identities, which avoids fraction reduction inside the
  // large double sums
  ComponentCheck ex;
  ex.rules = &rules;
  {
    const ConnectionField& cg = p.gamma_g();
    const ConnectionField& cgt = p.gamma_gt();
    const Matrix& gup = p.g_con().components();
    std::vector<RationalExpr> entries;
    entries.reserve(n * n * n + n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t m = 0; m < n; ++m)
          entries.push_back(cg.gamma[a][i][m] - cgt.gamma[a][i][m]);
    for (std::size_t ss = 0; ss < n; ++ss)
      for (std::size_t tt = 0; tt < n; ++tt) entries.push_back(gup[ss][tt]);
    ClearedFractions cf = clear_denominators(entries);
    auto D = [&](std::size_t i, std::size_t a, std::size_t m) -> const Polynomial& {
      return cf.num[(i * n + a) * n + m];
    };
    auto G = [&](std::size_t ss, std::size_t tt) -> const Polynomial& {
      return cf.num[n * n * n + ss * n + tt];
    };
    for (std::size_t i = 0; i < n && ex.ok; ++i)
      for (std::size_t j = i + 1; j < n && ex.ok; ++j)
        for (std::size_t a = 0; a < n && ex.ok; ++a)
          for (std::size_t b = 0; b < n; ++b) {
            Polynomial acc;
            for (std::size_t ss = 0; ss < n; ++ss)
              for (std::size_t tt = 0; tt < n; ++tt)
                acc = acc + G(ss, tt) * (D(i, a, ss) * D(j, b, tt) - D(j, a, ss) * D(i, b, tt));
            ex.expect_zero(RationalExpr::from_polynomial(acc),
                           "gradient-exchange" + idx({i, j, a, b}));
            if (!ex.ok) break;
          }
  }
  rep.add("pencil/compatible/gradient-exchange-symmetry", ex.ok, ex.witness);

  ComponentCheck assoc;
  assoc.rules = &rules;
  {
    MultiplicationTable circ = circ_multiplication(p);
    std::vector<RationalExpr> entries;
    entries.reserve(n * n * n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t m = 0; m < n; ++m) entries.push_back(circ.c[a][b][m]);
    ClearedFractions cf = clear_denominators(entries);
    auto C = [&](std::size_t a, std::size_t b, std::size_t m) -> const Polynomial& {
      return cf.num[(a * n + b) * n + m];
    };
    for (std::size_t a = 0; a < n && assoc.ok; ++a)
      for (std::size_t b = 0; b < n && assoc.ok; ++b)
        for (std::size_t c = 0; c < n && assoc.ok; ++c)
          for (std::size_t l = 0; l < n; ++l) {
            Polynomial acc;
            for (std::size_t m = 0; m < n; ++m)
              acc = acc + C(a, b, m) * C(m, c, l) - C(a, c, m) * C(m, b, l);
            assoc.expect_zero(RationalExpr::from_polynomial(acc), "associator" + idx({a, b, c, l}));
            if (!assoc.ok) break;
          }
  }
  rep.add("pencil/compatible/circ-associator-symmetry", assoc.ok, assoc.witness);
  rep.add("pencil/compatible/routes-agree", ex.ok == assoc.ok,
          ex.ok == assoc.ok ? "" : "the connection-level formulations disagree");
  return rep;
}

Report is_flat_pencil(const MetricPair& p, const RuleSet& rules) {
  Report rep;
  Report pre = is_compatible(p, rules);
  if (!pre.all_passed()) {
    rep.add_skip("pencil/flat/lambda-curvature-vanishes", "pair is not compatible");
    return rep;
  }
  std::size_t n = p.dim();
  const CurvatureField& rl = p.riemann_lambda();
  ComponentCheck flat;
  flat.rules = &rules;
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          flat.expect_zero(rl.r[l][k][i][j], "R^lambda" + idx({l, k, i, j}));
  rep.add("pencil/flat/lambda-curvature-vanishes", flat.ok, flat.witness);
  return rep;
}

Report lemma_exchange_symmetry(const MetricPair& p, const RuleSet& rules) {
  Report rep;
  std::size_t n = p.dim();
  const Chart& chart = p.chart();
  const ConnectionField& cg = p.gamma_g();
  const ConnectionField& cgt = p.gamma_gt();
  const MetricField& g = p.g_cov();
  const MetricField& gt = p.gt_cov();

  ComponentCheck sym;
  sym.rules = &rules;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t a = 0; a < n; ++a) {
        OneForm alpha{chart, std::vector<RationalExpr>(n)};
        alpha.comp[a] = RationalExpr::from_int(1);
        VectorField X{chart, std::vector<RationalExpr>(n)};
        X.comp[i] = RationalExpr::from_int(1);
        VectorField Y{chart, std::vector<RationalExpr>(n)};
        Y.comp[j] = RationalExpr::from_int(1);
        OneForm dX{chart, std::vector<RationalExpr>(n)};
        OneForm dY{chart, std::vector<RationalExpr>(n)};
        for (std::size_t m = 0; m < n; ++m) {
          dX.comp[m] = cg.gamma[a][i][m] - cgt.gamma[a][i][m];
          dY.comp[m] = cg.gamma[a][j][m] - cgt.gamma[a][j][m];
        }
        RationalExpr lhs = inner_form(g, dX, lower(gt, Y));
        RationalExpr rhs = inner_form(g, dY, lower(gt, X));
        sym.expect_zero(lhs - rhs, "lemma-exchange" + idx({i, j, a}));
      }
  rep.add("pencil/lemma/exchange-symmetric", sym.ok, sym.witness);
  return rep;
}

BulletResult bullet_from_pencil(const MetricPair& p, const VectorField& e,
                               const RuleSet& rules) {
  std::size_t n = p.dim();
  const Chart& chart = p.chart();
  MultiplicationTable circ = circ_multiplication(p);
  OneForm gE = lower(p.g_cov(), e);

  BulletResult out{EndomorphismField{chart, Matrix(n, std::vector<RationalExpr>(n))},
                   RationalExpr(),
                   false,
                   Polynomial(),
                   MultiplicationTable{chart, Space::cotangent,
                                       std::vector<Matrix>(n, Matrix(n, std::vector<RationalExpr>(n)))},
                   MultiplicationTable{chart, Space::tangent,
                                       std::vector<Matrix>(n, Matrix(n, std::vector<RationalExpr>(n)))},
                   Report{}};

  // T(u)_m = sum_i gE_i C[i][j][m] u_j
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t j = 0; j < n; ++j) {
      RationalExpr s;
      for (std::size_t i = 0; i < n; ++i) s += gE.comp[i] * circ.c[i][j][m];
      out.t.comp[m][j] = s;
    }
  out.det_t = matrix_determinant(out.t.comp);
  if (out.det_t.is_zero()) throw SingularT();
  out.regular = true;
  out.locus = out.det_t.num().primitive_part();

  Matrix tinv = matrix_inverse(out.t.comp);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t m = 0; m < n; ++m) {
        RationalExpr s;
        for (std::size_t k = 0; k < n; ++k) s += circ.c[i][k][m] * tinv[k][j];
        out.cotangent.c[i][j][m] = s;
      }

  const Matrix& gtup = p.gt_con().components();
  const Matrix& gtdn = p.gt_cov().components();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t k = 0; k < n; ++k) {
        RationalExpr s;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            for (std::size_t m = 0; m < n; ++m)
              s += gtdn[a][i] * gtdn[b][j] * out.cotangent.c[i][j][m] * gtup[k][m];
        out.tangent.c[a][b][k] = s;
      }

  // algebra checks on the product
  ComponentCheck ident;
  ident.rules = &rules;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t m = 0; m < n; ++m) {
      RationalExpr s;
      for (std::size_t i = 0; i < n; ++i) s += gE.comp[i] * out.cotangent.c[i][j][m];
      ident.expect_zero(s - (m == j ? RationalExpr::from_int(1) : RationalExpr()),
                        "identity" + idx({j, m}));
    }
  out.checks.add("pencil/bullet/identity-element", ident.ok, ident.witness);

  ComponentCheck comm;
  comm.rules = &rules;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t m = 0; m < n; ++m)
        comm.expect_zero(out.cotangent.c[i][j][m] - out.cotangent.c[j][i][m],
                         "commutativity" + idx({i, j, m}));
  out.checks.add("pencil/bullet/commutative", comm.ok, comm.witness);

  ComponentCheck assoc;
  assoc.rules = &rules;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t l = 0; l < n; ++l) {
          RationalExpr lhs, rhs;
          for (std::size_t m = 0; m < n; ++m) {
            lhs += out.cotangent.c[a][b][m] * out.cotangent.c[m][c][l];
            rhs += out.cotangent.c[b][c][m] * out.cotangent.c[a][m][l];
          }
          assoc.expect_zero(lhs - rhs, "associativity" + idx({a, b, c, l}));
        }
  out.checks.add("pencil/bullet/associative", assoc.ok, assoc.witness);

  const Matrix& gup = p.g_con().components();
  ComponentCheck invg, invgt;
  invg.rules = &rules;
  invgt.rules = &rules;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c) {
        RationalExpr lg, rg, lgt, rgt;
        for (std::size_t m = 0; m < n; ++m) {
          lg += gup[m][c] * out.cotangent.c[a][b][m];
          rg += gup[a][m] * out.cotangent.c[b][c][m];
          lgt += gtup[m][c] * out.cotangent.c[a][b][m];
          rgt += gtup[a][m] * out.cotangent.c[b][c][m];
        }
        invg.expect_zero(lg - rg, "g-invariance" + idx({a, b, c}));
        invgt.expect_zero(lgt - rgt, "gt-invariance" + idx({a, b, c}));
      }
  out.checks.add("pencil/bullet/g-invariant", invg.ok, invg.witness);
  out.checks.add("pencil/bullet/gt-invariant", invgt.ok, invgt.witness);

  ComponentCheck keq;
  keq.rules = &rules;
  {
    EndomorphismField K = pair_endomorphism(p);
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t j = 0; j < n; ++j) {
        RationalExpr s;
        for (std::size_t k = 0; k < n; ++k) s += e.comp[k] * out.tangent.c[k][j][m];
        keq.expect_zero(s - K.comp[m][j], "K-vs-E-bullet" + idx({m, j}));
      }
  }
  out.checks.add("pencil/bullet/e-bullet-equals-K", keq.ok, keq.witness);

  std::ostringstream note;
  note << "det T locus: " << to_string(out.locus);
  out.checks.add_pass("pencil/bullet/regularity-locus", note.str());
  return out;
}

std::vector<Matrix> lie_derivative_table(const VectorField& z, const MultiplicationTable& table) {
  if (table.space != Space::tangent)
    throw Error("Lie derivative of a multiplication is computed on the tangent table");
  const Chart& chart = table.chart;
  std::size_t n = chart.dim();
  std::vector<Matrix> out(n, Matrix(n, std::vector<RationalExpr>(n)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        RationalExpr s;
        for (std::size_t a = 0; a < n; ++a) {
          s += z.comp[a] * table.c[i][j][k].derivative(chart.coords[a]);
          s -= table.c[i][j][a] * z.comp[k].derivative(chart.coords[a]);
          s += z.comp[a].derivative(chart.coords[i]) * table.c[a][j][k];
          s += z.comp[a].derivative(chart.coords[j]) * table.c[i][a][k];
        }
        out[i][j][k] = s;
      }
  return out;
}

std::optional<RationalExpr> table_rescaling_factor(const VectorField& z,
                                                   const MultiplicationTable& table,
                                                   const RuleSet& rules) {
  std::size_t n = table.chart.dim();
  auto lie = lie_derivative_table(z, table);
  std::optional<RationalExpr> f;
  for (std::size_t i = 0; i < n && !f; ++i)
    for (std::size_t j = 0; j < n && !f; ++j)
      for (std::size_t k = 0; k < n && !f; ++k)
        if (!table.c[i][j][k].is_zero()) f = lie[i][j][k] / table.c[i][j][k];
  if (!f) return std::nullopt;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (!is_zero_modulo(lie[i][j][k] - *f * table.c[i][j][k], rules)) return std::nullopt;
  return f;
}

}  // namespace symt
