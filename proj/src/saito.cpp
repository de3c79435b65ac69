#include <algorithm>
#include <map>
#include <sstream>

#include "symtensor/saito.hpp"

namespace symt {

namespace {

RationalExpr one() { return RationalExpr::from_int(1); }

Polynomial binomial_real_power(long m, const std::string& xv, const std::string& yv) {
  // Re((x + i y)^m) with exact rational coefficients
  Polynomial x = Polynomial::variable(xv).primitive_part();
  Polynomial out;
  mpz_class binom = 1;
  Polynomial px = Polynomial::variable(xv);
  Polynomial py = Polynomial::variable(yv);
  for (long j = 0; j <= m; j += 2) {
    mpz_class cj;
    mpz_bin_uiui(cj.get_mpz_t(), static_cast<unsigned long>(m), static_cast<unsigned long>(j));
    Rational coeff(cj);
    if ((j / 2) % 2 == 1) coeff = -coeff;
    out = out + (px.pow(static_cast<std::uint32_t>(m - j)) * py.pow(static_cast<std::uint32_t>(j)))
                    .scaled(coeff);
  }
  return out;
}

Polynomial sum_of_squares(const Chart& chart) {
  Polynomial q;
  for (const auto& c : chart.coords) {
    Polynomial v = Polynomial::variable(c);
    q = q + v * v;
  }
  return q;
}

CoxeterDatum dihedral(long m, const std::string& name) {
  if (m < 3) throw Error("dihedral entries need m >= 3");
  CoxeterDatum cd;
  cd.name = name;
  cd.rank = 2;
  cd.degrees = {m, 2};
  cd.xchart = Chart("ambient", {"x", "y"});
  cd.invariants = {binomial_real_power(m, "x", "y"), sum_of_squares(cd.xchart)};
  return cd;
}

CoxeterDatum a3_datum() {
  // rank-3 model on R^3: permutations with even sign changes.
  // basis: 8 e2(x^2) - (sum x^2)^2, x1 x2 x3, sum x^2
  CoxeterDatum cd;
  cd.name = "A3";
  cd.rank = 3;
  cd.degrees = {4, 3, 2};
  cd.xchart = Chart("ambient", {"x1", "x2", "x3"});
  Polynomial x1 = Polynomial::variable("x1");
  Polynomial x2 = Polynomial::variable("x2");
  Polynomial x3 = Polynomial::variable("x3");
  Polynomial sq1 = x1 * x1, sq2 = x2 * x2, sq3 = x3 * x3;
  Polynomial sigma2 = sq1 * sq2 + sq2 * sq3 + sq3 * sq1;
  Polynomial q = sq1 + sq2 + sq3;
  cd.invariants = {sigma2.scaled(Rational(8)) - q * q, x1 * x2 * x3, q};
  return cd;
}

}  // namespace

CoxeterDatum catalog_entry(const std::string& name) {
  if (name == "A2") return dihedral(3, "A2");
  if (name == "B2") return dihedral(4, "B2");
  if (name == "A3") return a3_datum();
  if (name.rfind("I2(", 0) == 0 && name.back() == ')') {
    std::string inner = name.substr(3, name.size() - 4);
    try {
      long m = std::stol(inner);
      return dihedral(m, name);
    } catch (const std::exception&) {
      throw Error("bad dihedral order in " + name);
    }
  }
  throw UnknownSymbol(name);
}

std::vector<std::string> catalog_names() { return {"I2(m)", "A2", "A3", "B2"}; }

CoxeterDatum parse_coxeter_datum(const std::string& text) {
  CoxeterDatum cd;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> coords;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "name") {
      cd.name = value;
    } else if (key == "degrees") {
      std::istringstream vs(value);
      long d;
      while (vs >> d) cd.degrees.push_back(d);
    } else if (key == "coords") {
      std::istringstream vs(value);
      std::string c;
      while (vs >> c) coords.push_back(c);
    } else if (key == "invariant") {
      RationalExpr e = parse_expr(value);
      if (!e.is_polynomial()) throw ScenarioError("invariant must be a polynomial: " + value);
      cd.invariants.push_back(e.num());
    } else {
      throw ScenarioError("unknown catalog key: " + key);
    }
  }
  if (coords.empty() || cd.invariants.size() != coords.size() ||
      cd.degrees.size() != coords.size())
    throw ScenarioError("catalog entry needs matching coords, degrees and invariants");
  cd.rank = coords.size();
  cd.xchart = Chart("ambient", coords);
  if (cd.name.empty()) throw ScenarioError("catalog entry needs a name");
  for (std::size_t i = 0; i + 1 < cd.degrees.size(); ++i)
    if (cd.degrees[i] < cd.degrees[i + 1]) throw ScenarioError("degrees must be descending");
  if (cd.degrees.back() != 2) throw ScenarioError("last degree must be 2");
  if (Polynomial::compare(cd.invariants.back(), sum_of_squares(cd.xchart)) != 0)
    throw ScenarioError("last invariant must be the sum of coordinate squares");
  return cd;
}

namespace {

// exact dense solve A c = b over the rationals; returns empty optional when
// inconsistent; free unknowns are set to zero
std::optional<std::vector<Rational>> solve_rational(std::vector<std::vector<Rational>> a,
                                                    std::vector<Rational> b) {
  std::size_t rows = a.size();
  std::size_t cols = rows ? a[0].size() : 0;
  std::vector<long> pivot_of_col(cols, -1);
  std::size_t r = 0;
  for (std::size_t col = 0; col < cols && r < rows; ++col) {
    std::size_t piv = r;
    while (piv < rows && a[piv][col] == 0) ++piv;
    if (piv == rows) continue;
    std::swap(a[piv], a[r]);
    std::swap(b[piv], b[r]);
    Rational lead = a[r][col];
    for (std::size_t j = col; j < cols; ++j) a[r][j] /= lead;
    b[r] /= lead;
    for (std::size_t other = 0; other < rows; ++other) {
      if (other == r || a[other][col] == 0) continue;
      Rational f = a[other][col];
      for (std::size_t j = col; j < cols; ++j) a[other][j] -= f * a[r][j];
      b[other] -= f * b[r];
    }
    pivot_of_col[col] = static_cast<long>(r);
    ++r;
  }
  for (std::size_t rr = r; rr < rows; ++rr)
    if (b[rr] != 0) return std::nullopt;
  std::vector<Rational> sol(cols, Rational(0));
  for (std::size_t col = 0; col < cols; ++col)
    if (pivot_of_col[col] >= 0) sol[col] = b[static_cast<std::size_t>(pivot_of_col[col])];
  return sol;
}

void enumerate_exponents(const std::vector<long>& degrees, long target, std::size_t pos,
                         std::vector<std::uint32_t>& current,
                         std::vector<std::vector<std::uint32_t>>& out) {
  if (pos == degrees.size()) {
    if (target == 0) out.push_back(current);
    return;
  }
  for (long e = 0; e * degrees[pos] <= target; ++e) {
    current[pos] = static_cast<std::uint32_t>(e);
    enumerate_exponents(degrees, target - e * degrees[pos], pos + 1, current, out);
  }
  current[pos] = 0;
}

// coefficient map of a polynomial keyed by printed monomial in fixed chart
std::map<std::vector<std::uint32_t>, Rational> coeff_map(const Polynomial& p,
                                                         const Chart& xchart) {
  std::map<std::vector<std::uint32_t>, Rational> out;
  const auto& indets = p.indets();
  std::vector<std::size_t> pos(indets.size());
  for (std::size_t i = 0; i < indets.size(); ++i) {
    const std::string& name = std::get<std::string>(indets[i]);
    auto it = std::find(xchart.coords.begin(), xchart.coords.end(), name);
    if (it == xchart.coords.end()) throw RewriteFailed("unexpected variable " + name);
    pos[i] = static_cast<std::size_t>(it - xchart.coords.begin());
  }
  for (const auto& t : p.terms()) {
    std::vector<std::uint32_t> key(xchart.dim(), 0);
    for (std::size_t i = 0; i < t.exps.size(); ++i) key[pos[i]] = t.exps[i];
    out[key] = t.coeff;
  }
  return out;
}

}  // namespace

RationalExpr rewrite_in_invariants(const CoxeterDatum& cd, const Polynomial& value,
                                   const Chart& tchart) {
  if (value.is_zero()) return RationalExpr();
  // split into homogeneous components in the ambient degree
  std::map<long, Polynomial> components;
  for (const auto& t : value.terms()) {
    long deg = 0;
    for (auto e : t.exps) deg += e;
    components[deg] = components[deg] + Polynomial::from_terms(value.indets(), {t});
  }

  RationalExpr result;
  for (const auto& [deg, comp] : components) {
    std::vector<std::vector<std::uint32_t>> candidates;
    std::vector<std::uint32_t> current(cd.rank, 0);
    enumerate_exponents(cd.degrees, deg, 0, current, candidates);
    if (candidates.empty()) throw RewriteFailed("no invariant monomials of degree " + std::to_string(deg));

    // expand candidates in the ambient coordinates
    std::vector<std::map<std::vector<std::uint32_t>, Rational>> columns;
    std::map<std::vector<std::uint32_t>, std::size_t> row_of;
    auto intern = [&](const std::map<std::vector<std::uint32_t>, Rational>& m) {
      for (const auto& [k, v] : m)
        if (!row_of.count(k)) {
          std::size_t next = row_of.size();
          row_of[k] = next;
        }
    };
    for (const auto& exps : candidates) {
      Polynomial prod = Polynomial::constant(Rational(1));
      for (std::size_t i = 0; i < cd.rank; ++i)
        if (exps[i] > 0) prod = prod * cd.invariants[i].pow(exps[i]);
      columns.push_back(coeff_map(prod, cd.xchart));
      intern(columns.back());
    }
    auto target = coeff_map(comp, cd.xchart);
    intern(target);

    std::vector<std::vector<Rational>> a(row_of.size(),
                                         std::vector<Rational>(candidates.size(), Rational(0)));
    std::vector<Rational> b(row_of.size(), Rational(0));
    for (std::size_t c = 0; c < columns.size(); ++c)
      for (const auto& [k, v] : columns[c]) a[row_of[k]][c] = v;
    for (const auto& [k, v] : target) b[row_of[k]] = v;

    auto sol = solve_rational(a, b);
    if (!sol) throw RewriteFailed("no exact invariant combination at degree " + std::to_string(deg));
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if ((*sol)[c] == 0) continue;
      RationalExpr mono = RationalExpr::constant((*sol)[c]);
      for (std::size_t i = 0; i < cd.rank; ++i)
        if (candidates[c][i] > 0)
          mono *= RationalExpr::variable(tchart.coords[i]).pow(candidates[c][i]);
      result += mono;
    }
  }

  // round-trip: substituting the invariants back must reproduce the input
  std::map<std::string, RationalExpr> back;
  for (std::size_t i = 0; i < cd.rank; ++i)
    back[tchart.coords[i]] = RationalExpr::from_polynomial(cd.invariants[i]);
  if (result.substitute(back) != RationalExpr::from_polynomial(value))
    throw RewriteFailed("round-trip mismatch");
  return result;
}

MetricField pushforward_metric(const CoxeterDatum& cd) {
  std::size_t n = cd.rank;
  std::vector<std::string> tnames;
  for (std::size_t i = 0; i < n; ++i) tnames.push_back("t" + std::to_string(i + 1));
  Chart tchart("orbit", tnames);

  Matrix comp(n, std::vector<RationalExpr>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      Polynomial entry;
      for (const auto& xc : cd.xchart.coords) {
        RationalExpr di = RationalExpr::from_polynomial(cd.invariants[i]).derivative(xc);
        RationalExpr dj = RationalExpr::from_polynomial(cd.invariants[j]).derivative(xc);
        entry = entry + (di * dj).num();
      }
      comp[i][j] = rewrite_in_invariants(cd, entry, tchart);
      comp[j][i] = comp[i][j];
    }
  }
  return MetricField(tchart, Variance::contravariant, comp);
}

SaitoPencilResult saito_pencil(const CoxeterDatum& cd) {
  std::size_t n = cd.rank;
  MetricField raw = pushforward_metric(cd);
  const Chart& tchart = raw.chart();

  // derivative along the unit direction must be constant anti-diagonal
  std::vector<Rational> kappa(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      RationalExpr d = raw.at(i, j).derivative(tchart.coords[0]);
      if (i + j + 2 == n + 1) {
        if (!d.is_constant() || d.is_zero()) throw NormalizationFailed();
        kappa[i] = d.constant_value();
      } else if (!d.is_zero()) {
        throw NormalizationFailed();
      }
    }
  for (std::size_t i = 0; i < n; ++i)
    if (kappa[i] != kappa[n - 1 - i]) throw NormalizationFailed();

  // scalings with lambda_i lambda_{n+1-i} kappa_i = lambda_1 and the middle
  // square absorbed into lambda_1
  std::vector<Rational> lambda(n, Rational(1));
  if (n % 2 == 1) {
    lambda[0] = kappa[(n - 1) / 2];
    if (lambda[0] == 0) throw NormalizationFailed();
  }
  lambda[n - 1] = lambda[0] / (kappa[0] * lambda[0]);  // = 1/kappa[0]
  for (std::size_t i = 1; 2 * i < n - 1; ++i) {
    lambda[n - 1 - i] = 1;
    lambda[i] = lambda[0] / kappa[i];
  }
  if (n == 1) lambda[0] = Rational(1) / kappa[0];
  for (std::size_t i = 0; i < n; ++i) {
    Rational lhs = lambda[i] * lambda[n - 1 - i] * kappa[i];
    if (lhs != lambda[0]) throw NormalizationFailed();
  }

  std::map<std::string, RationalExpr> unscale;
  for (std::size_t i = 0; i < n; ++i)
    unscale[tchart.coords[i]] =
        RationalExpr::variable(tchart.coords[i]) / RationalExpr::constant(lambda[i]);
  Matrix norm(n, std::vector<RationalExpr>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      norm[i][j] = RationalExpr::constant(lambda[i] * lambda[j]) * raw.at(i, j).substitute(unscale);
  MetricField g(tchart, Variance::contravariant, norm);

  Matrix anti(n, std::vector<RationalExpr>(n));
  Report checks;
  bool unit_ok = true;
  std::string unit_witness;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      anti[i][j] = g.at(i, j).derivative(tchart.coords[0]);
      RationalExpr expect = (i + j + 2 == n + 1) ? one() : RationalExpr();
      if (anti[i][j] != expect && unit_ok) {
        unit_ok = false;
        unit_witness = witness_entry("Lie_e g* [" + std::to_string(i + 1) + "," +
                                         std::to_string(j + 1) + "]",
                                     anti[i][j] - expect);
      }
    }
  if (!unit_ok) throw NormalizationFailed();
  checks.add_pass("saito/unit-antidiagonal-partner");
  MetricField gt(tchart, Variance::contravariant, anti);

  VectorField euler{tchart, std::vector<RationalExpr>(n)};
  for (std::size_t i = 0; i < n; ++i)
    euler.comp[i] = RationalExpr::from_int(cd.degrees[i]) * RationalExpr::variable(tchart.coords[i]);
  VectorField identity{tchart, std::vector<RationalExpr>(n)};
  identity.comp[0] = one();

  MetricPair pair(g, gt);
  checks.merge(is_flat_pencil(pair));

  auto factor = conformal_factor(euler, gt);
  bool euler_ok = factor && *factor == RationalExpr::from_int(cd.degrees[0] + 2);
  checks.add("saito/euler-rescales-partner", euler_ok,
             factor ? witness_entry("factor", *factor) : "no factor",
             "expected " + std::to_string(cd.degrees[0] + 2));

  OneForm ge = lower(g, euler);
  bool dir_ok = true;
  std::string dir_witness;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!ge.comp[i].is_zero()) {
      dir_ok = false;
      dir_witness = witness_entry("g(E) slot " + std::to_string(i + 1), ge.comp[i]);
      break;
    }
  if (dir_ok && (!ge.comp[n - 1].is_constant() || ge.comp[n - 1].is_zero())) {
    dir_ok = false;
    dir_witness = witness_entry("g(E) last slot", ge.comp[n - 1]);
  }
  checks.add("saito/euler-form-points-along-last-coordinate", dir_ok, dir_witness,
             dir_ok ? "g(E) = " + to_string(ge.comp[n - 1]) + " dt" + std::to_string(n) : "");

  return SaitoPencilResult{cd,    tchart, lambda, std::move(g), std::move(gt),
                           euler, identity, std::move(checks)};
}

ModifiedSaitoResult modified_saito(const CoxeterDatum& cd, const RationalExpr& c,
                                   const RationalExpr& d) {
  if (c.is_zero() && d.is_zero()) throw PreconditionFailed("(c, d) must not both vanish");
  SaitoPencilResult base = saito_pencil(cd);
  std::size_t n = cd.rank;
  const Chart& tchart = base.tchart;

  RationalExpr q = RationalExpr::variable(tchart.coords[n - 1]) /
                   RationalExpr::constant(base.scaling[n - 1]);
  RationalExpr omega = (c * q + d).pow(-1);

  ScaledPencil pencil = make_scaled_pencil(MetricPair(base.g, base.gt), omega, base.euler);

  Report checks;
  // ambient consistency: the quadratic invariant really is the last raw
  // coordinate, so the conformal factor matches the ambient scaling
  {
    RationalExpr rewritten = rewrite_in_invariants(cd, sum_of_squares(cd.xchart), tchart);
    bool ok = rewritten == RationalExpr::variable(tchart.coords[n - 1]);
    checks.add("modified-saito/ambient-quadratic-is-last-coordinate", ok,
               ok ? "" : witness_entry("rewrite", rewritten));
  }

  {
    const CurvatureField& r = metric_curvature(pencil.scaled.gt_cov());
    bool flat = r.is_zero();
    std::string witness;
    if (!flat) {
      for (std::size_t l = 0; l < n && witness.empty(); ++l)
        for (std::size_t k = 0; k < n && witness.empty(); ++k)
          for (std::size_t i = 0; i < n && witness.empty(); ++i)
            for (std::size_t j = 0; j < n; ++j)
              if (!r.r[l][k][i][j].is_zero()) {
                witness = witness_entry("R^ht component", r.r[l][k][i][j]);
                break;
              }
    }
    checks.add("modified-saito/scaled-partner-flat", flat, witness);
  }

  {
    auto s = constant_sectional_curvature(pencil.scaled.g_cov());
    RationalExpr expected = RationalExpr::from_int(4) * c * d;
    bool ok = s.has_value() && *s == expected;
    checks.add("modified-saito/sectional-curvature-4cd", ok,
               s ? witness_entry("s", *s) : "no constant shape",
               "expected " + to_string(expected));
  }

  checks.merge(is_compatible_connection_level(pencil.scaled));
  checks.merge(weak_quasihomogeneous_check(pencil));
  {
    BulletResult b = bullet_from_pencil(pencil.scaled, pencil.euler);
    checks.merge(f_manifold_check(pencil.scaled.gt_cov(), b.tangent, pencil.euler));
  }

  return ModifiedSaitoResult{std::move(base), c, d, q, omega, std::move(pencil),
                             std::move(checks)};
}

Report regularity_locus(const ModifiedSaitoResult& ms) {
  Report rep;
  const Chart& tchart = ms.base.tchart;
  std::size_t n = ms.base.datum.rank;
  long d1 = ms.base.datum.degrees[0];
  BulletResult b = bullet_from_pencil(ms.pencil.scaled, ms.pencil.euler);

  // displayed form of the unit endomorphism, in the normalized frame with
  // cbar = c / scaling_n
  RationalExpr cbar = ms.c / RationalExpr::constant(ms.base.scaling[n - 1]);
  RationalExpr tn = RationalExpr::variable(tchart.coords[n - 1]);
  RationalExpr lin = cbar * tn + ms.d;
  bool formula_ok = true;
  std::string formula_witness;
  for (std::size_t i = 0; i < n && formula_ok; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      RationalExpr expect = (i == j ? RationalExpr::from_int(ms.base.datum.degrees[i] - 1)
                                    : RationalExpr());
      if (j == 0)
        expect += cbar * RationalExpr::from_int(ms.base.datum.degrees[n - 1 - i]) *
                  RationalExpr::variable(tchart.coords[n - 1 - i]) / lin;
      if (i == n - 1)
        expect -= cbar * RationalExpr::from_int(ms.base.datum.degrees[j]) *
                  RationalExpr::variable(tchart.coords[j]) / lin;
      if (b.t.comp[i][j] != expect) {
        formula_ok = false;
        formula_witness = witness_entry(
            "T[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]",
            b.t.comp[i][j] - expect);
        break;
      }
    }
  rep.add("modified-saito/unit-endomorphism-formula", formula_ok, formula_witness);

  if (ms.c.is_zero()) {
    bool const_det = expr_is_chart_constant(b.det_t, tchart);
    rep.add("modified-saito/regularity-locus-factorization", const_det,
            const_det ? "" : witness_entry("det T", b.det_t),
            "no excluded locus for constant scaling");
    return rep;
  }

  Polynomial det_num = b.det_t.num().primitive_part();
  Polynomial l1 = (cbar * tn - ms.d).num().primitive_part();
  Polynomial l2 = (RationalExpr::from_int(1 + d1) * cbar * tn -
                   RationalExpr::from_int(1 - d1) * ms.d)
                      .num()
                      .primitive_part();
  Polynomial rest = det_num;
  int count1 = 0, count2 = 0;
  while (auto qd = Polynomial::divide_exact(rest, l1)) {
    rest = *qd;
    ++count1;
  }
  while (auto qd = Polynomial::divide_exact(rest, l2)) {
    rest = *qd;
    ++count2;
  }
  bool rest_free = true;
  for (const auto& coord : tchart.coords)
    if (rest.depends_on(Indet{coord})) rest_free = false;
  bool ok = count1 >= 1 && count2 >= 1 && rest_free;
  std::ostringstream note;
  note << "det T ~ L1^" << count1 << " * L2^" << count2 << " * (" << to_string(rest)
       << "), L1 = " << to_string(l1) << ", L2 = " << to_string(l2);
  rep.add("modified-saito/regularity-locus-factorization", ok,
          ok ? "" : witness_entry("unfactored part", RationalExpr::from_polynomial(rest)),
          note.str());
  return rep;
}

FlatCoordinateResult modified_flat_coordinates(std::size_t n, const RationalExpr& a,
                                               const RationalExpr& b, const RationalExpr& c,
                                               const RationalExpr& d) {
  if (!(a * d - b * c - one()).is_zero()) throw DeterminantNotOne();
  if (n < 2) throw Error("flat coordinate change needs dimension >= 2");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("t" + std::to_string(i + 1));
  Chart chart("flat", names);

  std::vector<RationalExpr> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = RationalExpr::variable(names[i]);
  RationalExpr lin = c * t[n - 1] + d;

  FlatCoordinateResult out;
  RationalExpr mid;
  for (std::size_t i = 1; i + 1 < n; ++i) mid += t[i] * t[n - 1 - i];
  out.map[names[0]] = t[0] + c * mid / (RationalExpr::from_int(2) * lin);
  for (std::size_t i = 1; i + 1 < n; ++i) out.map[names[i]] = t[i] / lin;
  out.map[names[n - 1]] = (a * t[n - 1] + b) / lin;

  // pullback identity: sum_k dt~^k dt~^{n+1-k} = lin^-2 * antidiagonal
  Matrix jac(n, std::vector<RationalExpr>(n));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) jac[k][i] = out.map.at(names[k]).derivative(names[i]);
  bool ok = true;
  std::string witness;
  RationalExpr lin2inv = (lin * lin).pow(-1);
  for (std::size_t i = 0; i < n && ok; ++i)
    for (std::size_t j = i; j < n; ++j) {
      RationalExpr sum;
      for (std::size_t k = 0; k < n; ++k) sum += jac[k][i] * jac[n - 1 - k][j];
      RationalExpr expect = (i + j + 2 == n + 1) ? lin2inv : RationalExpr();
      if (sum != expect) {
        ok = false;
        witness = witness_entry(
            "pullback [" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]",
            sum - expect);
        break;
      }
    }
  out.checks.add("flat-coordinates/pullback-identity", ok, witness);
  return out;
}

Prepotential saito_prepotential(const SaitoPencilResult& sp) {
  std::size_t n = sp.tchart.dim();
  MetricPair pair(sp.g, sp.gt);
  BulletResult b = bullet_from_pencil(pair, sp.euler);
  MetricField eta_cov = sp.gt.covariant();

  // lowered structure constants and their potential
  auto data = [&](const std::vector<std::size_t>& key) {
    if (key.size() != 3) throw Error("third derivatives expected");
    RationalExpr v;
    for (std::size_t l = 0; l < n; ++l)
      v += eta_cov.at(key[2], l) * b.tangent.c[key[0]][key[1]][l];
    return v;
  };
  RationalExpr f = reconstruct_from_derivatives(3, sp.tchart.coords, data, no_rules());

  // eta for the prepotential is the constant matrix of unit-slot third
  // derivatives (a constant multiple of the anti-diagonal)
  Matrix eta(n, std::vector<RationalExpr>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      RationalExpr v = f.derivative(sp.tchart.coords[0])
                           .derivative(sp.tchart.coords[i])
                           .derivative(sp.tchart.coords[j]);
      if (!expr_is_chart_constant(v, sp.tchart))
        throw Error("unit-slot derivatives of the orbit prepotential are not constant");
      eta[i][j] = v;
    }
  return Prepotential{sp.tchart, f, MetricField(sp.tchart, Variance::covariant, eta),
                      sp.euler, RuleSet()};
}

}  // namespace symt
