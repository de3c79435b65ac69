#include <json.hpp>
#include <fstream>
#include <set>
#include <sstream>

#include "symtensor/conformal.hpp"
#include "symtensor/crosscheck.hpp"
#include "symtensor/frobenius.hpp"
#include "symtensor/saito.hpp"
#include "symtensor/scenario.hpp"

namespace symt {

namespace {

std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  return s;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

}  // namespace

std::optional<std::string> Scenario::get(const std::string& key) const {
  for (const auto& [k, v] : bindings)
    if (k == key) return v;
  return std::nullopt;
}

std::vector<std::string> Scenario::get_all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : bindings)
    if (k == key) out.push_back(v);
  return out;
}

Scenario parse_scenario(const std::string& text) {
  Scenario s;
  std::istringstream in(text);
  std::string line;
  std::string section = "scenario";
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ScenarioError("expected key = value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ScenarioError("missing key in: " + line);
    if (key == "kind") {
      s.kind = value;
    } else if (key == "name") {
      s.name = value;
    } else if (key == "coords") {
      s.coords = split_ws(value);
    } else if (key == "symbols") {
      s.symbols = split_ws(value);
    } else if (key == "seed") {
      s.seed = std::stoull(value);
    } else {
      s.bindings.emplace_back(key, value);
    }
  }
  if (s.kind.empty()) throw ScenarioError("scenario needs a kind");
  if (s.name.empty()) s.name = "unnamed";
  return s;
}

namespace {

struct Workspace {
  const Scenario& s;
  Chart chart{"scenario", {"t1"}};
  bool has_chart = false;
  RuleSet rules;
  std::set<std::string> declared;

  explicit Workspace(const Scenario& sc) : s(sc) {
    if (!sc.coords.empty()) {
      chart = Chart("scenario", sc.coords);
      has_chart = true;
    }
    for (const auto& c : sc.coords) declared.insert(c);
    for (const auto& c : sc.symbols) declared.insert(c);
    for (const auto& r : sc.get_all("rule")) add_rule(r);
  }

  void validate_expr(const RationalExpr& e, const std::string& origin) const {
    for (const auto& v : e.variables()) {
      if (v == kPencilParameter)
        throw ScenarioError("the name '" + v + "' is reserved (in " + origin + ")");
      if (!declared.count(v)) throw UnknownVariable(v + " (in " + origin + ")");
    }
  }

  RationalExpr expr(const std::string& text, const std::string& origin) const {
    RationalExpr e = parse_expr(text);
    validate_expr(e, origin);
    return apply_rules(e, rules);
  }

  RationalExpr required_expr(const std::string& key) const {
    auto v = s.get(key);
    if (!v) throw ScenarioError("missing required binding: " + key);
    return expr(*v, key);
  }

  std::optional<RationalExpr> optional_expr(const std::string& key) const {
    auto v = s.get(key);
    if (!v) return std::nullopt;
    return expr(*v, key);
  }

  void add_rule(const std::string& text) {
    auto arrow = text.find("->");
    if (arrow == std::string::npos) throw ScenarioError("rule needs 'lhs -> rhs': " + text);
    RationalExpr lhs = parse_expr(trim(text.substr(0, arrow)));
    RationalExpr rhs = parse_expr(trim(text.substr(arrow + 2)));
    // lhs must be a single derivative atom whose arguments are plain names
    const Polynomial& p = lhs.num();
    if (!lhs.is_polynomial() || p.terms().size() != 1 || p.indets().size() != 1 ||
        !std::holds_alternative<FunctionAtom>(p.indets()[0]) ||
        p.terms()[0].exps[0] != 1 || p.terms()[0].coeff != 1)
      throw ScenarioError("rule left side must be a single derivative symbol: " + text);
    const auto& atom = std::get<FunctionAtom>(p.indets()[0]);
    std::vector<std::string> formal;
    for (const auto& arg : atom.args) {
      const Polynomial& ap = arg.num();
      if (!arg.is_polynomial() || ap.indets().size() != 1 ||
          !std::holds_alternative<std::string>(ap.indets()[0]) || ap.terms().size() != 1 ||
          ap.terms()[0].coeff != 1)
        throw ScenarioError("rule arguments must be plain variables: " + text);
      formal.push_back(std::get<std::string>(ap.indets()[0]));
    }
    rules.add(RewriteRule(atom.name, formal, atom.index, rhs));
  }

  MetricField metric(const std::string& prefix) const {
    if (!has_chart) throw ScenarioError("metric bindings need a chart (coords = ...)");
    std::size_t n = chart.dim();
    Matrix m(n, std::vector<RationalExpr>(n));
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        std::string key =
            prefix + "[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]";
        if (auto v = s.get(key)) {
          m[i][j] = expr(*v, key);
          any = true;
        }
      }
    if (!any) throw ScenarioError("missing metric entries for " + prefix);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) {
        if (m[i][j].is_zero() && !m[j][i].is_zero()) m[i][j] = m[j][i];
        if (m[j][i].is_zero() && !m[i][j].is_zero()) m[j][i] = m[i][j];
      }
    Variance variance = Variance::contravariant;
    if (auto v = s.get(prefix + "_variance")) {
      if (*v == "covariant")
        variance = Variance::covariant;
      else if (*v == "contravariant")
        variance = Variance::contravariant;
      else
        throw ScenarioError("bad variance: " + *v);
    }
    return MetricField(chart, variance, std::move(m));
  }

  VectorField vector_field(const std::string& key) const {
    auto v = s.get(key);
    if (!v) throw ScenarioError("missing required binding: " + key);
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : *v) {
      if (ch == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    if (parts.size() != chart.dim())
      throw ScenarioError(key + " needs " + std::to_string(chart.dim()) + " components");
    VectorField out{chart, {}};
    for (const auto& p : parts) out.comp.push_back(expr(trim(p), key));
    return out;
  }

  CoxeterDatum group() const {
    auto g = s.get("group");
    if (!g) throw ScenarioError("missing required binding: group");
    if (auto path = s.get("catalog_file")) {
      std::ifstream in(*path);
      if (!in) throw ScenarioError("cannot read catalog file " + *path);
      std::stringstream buf;
      buf << in.rdbuf();
      CoxeterDatum cd = parse_coxeter_datum(buf.str());
      if (cd.name != *g) throw ScenarioError("catalog file defines '" + cd.name + "', not '" + *g + "'");
      return cd;
    }
    try {
      return catalog_entry(*g);
    } catch (const UnknownSymbol&) {
      std::string names;
      for (const auto& n : catalog_names()) names += n + " ";
      throw ScenarioError("unknown group '" + *g + "'; available: " + names);
    }
  }
};

void crosscheck_metric(Report& rep, const std::string& label, const MetricField& m,
                       std::uint64_t seed) {
  Report r = jet_symbolic_crosscheck(m, 20, seed);
  for (auto& c : r.checks) {
    c.name = "jet-oracle/" + label;
    rep.checks.push_back(c);
  }
}

Report run_pencil_check(const Workspace& ws, std::uint64_t seed) {
  MetricField g = ws.metric("g");
  MetricField gt = ws.metric("gt");
  MetricPair pair(g, gt);
  Report rep;
  rep.merge(is_almost_compatible(pair, ws.rules));
  rep.merge(check_auxiliary_identities(pair, ws.rules));
  rep.merge(is_compatible(pair, ws.rules));
  rep.merge(is_flat_pencil(pair, ws.rules));
  rep.merge(lemma_exchange_symmetry(pair, ws.rules));
  if (ws.s.get("E")) {
    VectorField e = ws.vector_field("E");
    try {
      BulletResult b = bullet_from_pencil(pair, e, ws.rules);
      rep.merge(b.checks);
      auto f = table_rescaling_factor(e, b.tangent, ws.rules);
      if (f)
        rep.add_pass("pencil/bullet/euler-rescaling-factor",
                     "factor = " + to_string(*f) +
                         (expr_is_chart_constant(*f, pair.chart()) ? " (constant)"
                                                                   : " (nonconstant)"));
      else
        rep.add_fail("pencil/bullet/euler-rescaling-factor", "",
                     "no proportionality factor");
    } catch (const SingularT&) {
      rep.add_fail("pencil/bullet/regular", "", "det T vanishes identically");
    }
  }
  crosscheck_metric(rep, "g", g, seed);
  crosscheck_metric(rep, "gt", gt, seed + 1);
  return rep;
}

Report run_saito(const Workspace& ws, std::uint64_t seed, std::vector<std::string>& printed) {
  CoxeterDatum cd = ws.group();
  SaitoPencilResult sp = saito_pencil(cd);
  Report rep = sp.checks;
  Prepotential prep = saito_prepotential(sp);
  rep.merge(check_wdvv(prep));
  printed.push_back("prepotential F = " + to_string(prep.F));
  crosscheck_metric(rep, "g", sp.g, seed);
  return rep;
}

Report run_modified_saito(const Workspace& ws, std::uint64_t seed,
                          std::vector<std::string>& printed) {
  CoxeterDatum cd = ws.group();
  RationalExpr c = ws.required_expr("c");
  RationalExpr d = ws.required_expr("d");
  ModifiedSaitoResult ms = modified_saito(cd, c, d);
  Report rep = ms.checks;
  rep.merge(regularity_locus(ms));
  auto s = constant_sectional_curvature(ms.pencil.scaled.g_cov());
  if (s) printed.push_back("sectional curvature = " + to_string(*s));
  // flat coordinates of the scaled partner when the full parameter set is given
  auto a = ws.optional_expr("a");
  auto b = ws.optional_expr("b");
  if (a && b) {
    FlatCoordinateResult fc = modified_flat_coordinates(cd.rank, *a, *b, c, d);
    rep.merge(fc.checks);
  }
  crosscheck_metric(rep, "h", ms.pencil.scaled.g_cov(), seed);
  crosscheck_metric(rep, "ht", ms.pencil.scaled.gt_cov(), seed + 1);
  return rep;
}

Prepotential build_prepotential(const Workspace& ws) {
  if (!ws.has_chart) throw ScenarioError("this kind needs a chart (coords = ...)");
  RationalExpr f = ws.required_expr("F");
  std::size_t n = ws.chart.dim();
  // eta from the unit-coordinate derivatives of F
  Matrix eta(n, std::vector<RationalExpr>(n));
  for (std::size_t i = 0; i < n; ++i) {
    RationalExpr fi = apply_rules(f.derivative(ws.chart.coords[0]).derivative(ws.chart.coords[i]),
                                  ws.rules);
    for (std::size_t j = 0; j < n; ++j) {
      RationalExpr e = apply_rules(fi.derivative(ws.chart.coords[j]), ws.rules);
      if (!expr_is_chart_constant(e, ws.chart))
        throw ScenarioError("third derivatives along the unit coordinate are not constant");
      eta[i][j] = e;
    }
  }
  Prepotential p{ws.chart, f, MetricField(ws.chart, Variance::covariant, eta), std::nullopt,
                 ws.rules};
  if (ws.s.get("E")) p.euler = ws.vector_field("E");
  return p;
}

Report run_wdvv(const Workspace& ws) {
  Prepotential p = build_prepotential(ws);
  Report rep = check_wdvv(p);
  if (rep.all_passed()) {
    FrobeniusStructure s = frobenius_from_prepotential(p);
    rep.merge(s.checks);
    if (p.euler) {
      IntersectionResult ir = intersection_form(s);
      rep.merge(ir.checks);
    }
  }
  return rep;
}

Report run_frobenius(const Workspace& ws) {
  Prepotential p = build_prepotential(ws);
  FrobeniusStructure s = frobenius_from_prepotential(p);
  Report rep = s.checks;
  if (p.euler) {
    IntersectionResult ir = intersection_form(s);
    rep.merge(ir.checks);
    rep.merge(weak_f_manifold_check(p.eta, s.tangent, *p.euler, ws.rules));
    rep.merge(f_manifold_check(p.eta, s.tangent, *p.euler, ws.rules));
  }
  return rep;
}

Report run_sl2(const Workspace& ws, std::vector<std::string>& printed) {
  Prepotential p = build_prepotential(ws);
  RationalExpr a = ws.required_expr("a");
  RationalExpr b = ws.required_expr("b");
  RationalExpr c = ws.required_expr("c");
  RationalExpr d = ws.required_expr("d");
  Sl2Result r = sl2_transform(p, a, b, c, d);
  printed.push_back("transformed F = " + to_string(r.transformed.F));
  return r.checks;
}

Report run_conformal(const Workspace& ws, std::uint64_t seed) {
  RationalExpr omega = ws.required_expr("omega");
  std::optional<ScaledPencil> sp;
  if (ws.s.get("group")) {
    // omega is written in the normalized orbit coordinates t1..tn, which the
    // scenario declares as its chart
    CoxeterDatum cd = ws.group();
    SaitoPencilResult base = saito_pencil(cd);
    if (ws.has_chart && !(ws.chart == base.tchart))
      throw ScenarioError("chart must list the orbit coordinates t1..tn");
    sp = make_scaled_pencil(MetricPair(base.g, base.gt), omega, base.euler, ws.rules);
  } else {
    MetricField g = ws.metric("g");
    MetricField gt = ws.metric("gt");
    VectorField e = ws.vector_field("E");
    sp = make_scaled_pencil(MetricPair(g, gt), omega, e, ws.rules);
  }
  Report rep;
  rep.merge(weak_quasihomogeneous_check(*sp));
  rep.merge(euler_multiplication_rescaling_check(*sp));
  rep.merge(scaled_multiplication_agreement_check(*sp));
  rep.merge(weak_f_equivalence_check(*sp));
  rep.merge(scaled_factor_identities(*sp));
  crosscheck_metric(rep, "h", sp->scaled.g_cov(), seed);
  return rep;
}

}  // namespace

ScenarioOutcome run_scenario(const Scenario& s, std::uint64_t seed,
                             const std::optional<std::string>& only) {
  static const std::set<std::string> kinds = {
      "pencil-check", "saito", "modified-saito", "wdvv", "sl2", "frobenius", "conformal"};
  if (!kinds.count(s.kind)) throw ScenarioError("unknown scenario kind: " + s.kind);

  Workspace ws(s);
  ScenarioOutcome out;
  out.scenario = s;
  out.seed = s.seed.value_or(seed);

  Report rep;
  if (s.kind == "pencil-check") {
    rep = run_pencil_check(ws, out.seed);
  } else if (s.kind == "saito") {
    rep = run_saito(ws, out.seed, out.printed);
  } else if (s.kind == "modified-saito") {
    rep = run_modified_saito(ws, out.seed, out.printed);
  } else if (s.kind == "wdvv") {
    rep = run_wdvv(ws);
  } else if (s.kind == "sl2") {
    rep = run_sl2(ws, out.printed);
  } else if (s.kind == "frobenius") {
    rep = run_frobenius(ws);
  } else if (s.kind == "conformal") {
    rep = run_conformal(ws, out.seed);
  }

  // toggles: identities whose names start with a skip prefix are recorded
  // as skipped instead of asserted
  std::vector<std::string> skips;
  for (const auto& sk : s.get_all("skip"))
    for (const auto& w : split_ws(sk)) skips.push_back(w);
  if (!skips.empty()) {
    for (auto& c : rep.checks)
      for (const auto& prefix : skips)
        if (c.name.rfind(prefix, 0) == 0) {
          c.status = CheckStatus::skipped;
          c.witness.clear();
          c.note = "disabled by the scenario";
        }
  }

  if (only) {
    Report filtered;
    for (auto& c : rep.checks)
      if (c.name == *only) filtered.checks.push_back(c);
    if (filtered.checks.empty())
      throw ScenarioError("no identity named '" + *only + "' in this scenario");
    out.report = filtered;
  } else {
    out.report = rep;
  }
  return out;
}

std::string render_human(const ScenarioOutcome& o) {
  std::ostringstream out;
  out << "scenario: " << o.scenario.name << " (" << o.scenario.kind << ")\n";
  out << "seed: " << o.seed << "\n";
  for (const auto& c : o.report.checks) {
    const char* tag = c.status == CheckStatus::pass   ? "PASS"
                      : c.status == CheckStatus::fail ? "FAIL"
                                                      : "SKIP";
    out << "[" << tag << "] " << c.name;
    if (!c.note.empty()) out << "  (" << c.note << ")";
    if (!c.witness.empty()) out << "\n       witness: " << c.witness;
    out << "\n";
  }
  for (const auto& p : o.printed) out << p << "\n";
  out << (o.report.all_passed() ? "verdict: pass" : "verdict: FAIL") << "\n";
  return out.str();
}

std::string render_json(const ScenarioOutcome& o) {
  nlohmann::ordered_json j;
  j["scenario"]["name"] = o.scenario.name;
  j["scenario"]["kind"] = o.scenario.kind;
  nlohmann::ordered_json bindings = nlohmann::ordered_json::array();
  for (const auto& [k, v] : o.scenario.bindings) bindings.push_back({{"key", k}, {"value", v}});
  j["scenario"]["bindings"] = bindings;
  j["seed"] = o.seed;
  nlohmann::ordered_json ids = nlohmann::ordered_json::array();
  for (const auto& c : o.report.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["anchor"] = c.name;
    e["status"] = c.status == CheckStatus::pass   ? "pass"
                  : c.status == CheckStatus::fail ? "fail"
                                                  : "skipped";
    e["witness"] = c.witness;
    e["note"] = c.note;
    ids.push_back(e);
  }
  j["identities"] = ids;
  nlohmann::ordered_json printed = nlohmann::ordered_json::array();
  for (const auto& p : o.printed) printed.push_back(p);
  j["printed"] = printed;
  j["verdict"] = o.report.all_passed() ? "pass" : "fail";
  return j.dump(2) + "\n";
}

}  // namespace symt
