#include <algorithm>
#include <cassert>
#include <map>

#include "symtensor/expr.hpp"

namespace symt {

namespace {

// Graded-lex on exponent vectors of equal length: total degree first, then
// the exponent of the smallest indeterminate decides (bigger wins).
int exp_compare(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  long da = 0, db = 0;
  for (auto e : a) da += e;
  for (auto e : b) db += e;
  if (da != db) return da < db ? -1 : 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

int rational_compare(const Rational& a, const Rational& b) {
  int c = cmp(a, b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

}  // namespace

int compare(const FunctionAtom& a, const FunctionAtom& b) {
  if (a.name != b.name) return a.name < b.name ? -1 : 1;
  if (a.index.size() != b.index.size()) return a.index.size() < b.index.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.index.size(); ++i)
    if (a.index[i] != b.index[i]) return a.index[i] < b.index[i] ? -1 : 1;
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    int c = RationalExpr::compare(a.args[i], b.args[i]);
    if (c != 0) return c;
  }
  return 0;
}

int compare(const Indet& a, const Indet& b) {
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  if (std::holds_alternative<std::string>(a)) {
    const auto& sa = std::get<std::string>(a);
    const auto& sb = std::get<std::string>(b);
    return sa == sb ? 0 : (sa < sb ? -1 : 1);
  }
  return compare(std::get<FunctionAtom>(a), std::get<FunctionAtom>(b));
}

Polynomial Polynomial::constant(const Rational& c) {
  Polynomial p;
  if (c != 0) {
    Rational canon = c;
    canon.canonicalize();
    p.terms_.push_back(Term{{}, std::move(canon)});
  }
  return p;
}

Polynomial Polynomial::variable(const std::string& name) {
  return indeterminate(Indet{name});
}

Polynomial Polynomial::indeterminate(const Indet& v) {
  Polynomial p;
  p.indets_ = {v};
  p.terms_.push_back(Term{{1}, Rational(1)});
  return p;
}

Polynomial Polynomial::from_terms(std::vector<Indet> indets, std::vector<Term> terms) {
  Polynomial p;
  p.indets_ = std::move(indets);
  p.terms_ = std::move(terms);
  std::sort(p.terms_.begin(), p.terms_.end(),
            [](const Term& a, const Term& b) { return exp_compare(a.exps, b.exps) < 0; });
  // merge duplicates, drop zeros
  std::vector<Term> merged;
  for (auto& t : p.terms_) {
    if (!merged.empty() && exp_compare(merged.back().exps, t.exps) == 0) {
      merged.back().coeff += t.coeff;
      if (merged.back().coeff == 0) merged.pop_back();
    } else if (t.coeff != 0) {
      merged.push_back(std::move(t));
    }
  }
  p.terms_ = std::move(merged);
  p.strip_unused_indets();
  return p;
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_[0].exps.empty());
}

bool Polynomial::is_one() const {
  return terms_.size() == 1 && terms_[0].exps.empty() && terms_[0].coeff == 1;
}

Rational Polynomial::constant_value() const {
  if (terms_.empty()) return Rational(0);
  assert(is_constant());
  return terms_[0].coeff;
}

const Term& Polynomial::leading_term() const {
  assert(!terms_.empty());
  return terms_.back();
}

long Polynomial::total_degree() const {
  if (terms_.empty()) return -1;
  long deg = 0;
  for (auto e : terms_.back().exps) deg += e;
  return deg;
}

long Polynomial::degree_in(const Indet& v) const {
  auto it = std::lower_bound(indets_.begin(), indets_.end(), v,
                             [](const Indet& a, const Indet& b) { return symt::compare(a, b) < 0; });
  if (it == indets_.end() || symt::compare(*it, v) != 0) return 0;
  std::size_t pos = static_cast<std::size_t>(it - indets_.begin());
  long deg = 0;
  for (const auto& t : terms_)
    deg = std::max(deg, static_cast<long>(t.exps[pos]));
  return deg;
}

void Polynomial::strip_unused_indets() {
  if (indets_.empty()) return;
  std::vector<bool> used(indets_.size(), false);
  for (const auto& t : terms_)
    for (std::size_t i = 0; i < t.exps.size(); ++i)
      if (t.exps[i] > 0) used[i] = true;
  if (std::all_of(used.begin(), used.end(), [](bool b) { return b; })) return;
  std::vector<Indet> keep;
  std::vector<std::size_t> remap(indets_.size());
  for (std::size_t i = 0; i < indets_.size(); ++i) {
    if (used[i]) {
      remap[i] = keep.size();
      keep.push_back(indets_[i]);
    }
  }
  for (auto& t : terms_) {
    std::vector<std::uint32_t> exps(keep.size(), 0);
    for (std::size_t i = 0; i < t.exps.size(); ++i)
      if (used[i]) exps[remap[i]] = t.exps[i];
    t.exps = std::move(exps);
  }
  indets_ = std::move(keep);
}

void Polynomial::unify(const Polynomial& a, const Polynomial& b, Polynomial& ua, Polynomial& ub) {
  std::vector<Indet> merged;
  std::merge(a.indets_.begin(), a.indets_.end(), b.indets_.begin(), b.indets_.end(),
             std::back_inserter(merged),
             [](const Indet& x, const Indet& y) { return symt::compare(x, y) < 0; });
  merged.erase(std::unique(merged.begin(), merged.end(),
                           [](const Indet& x, const Indet& y) { return symt::compare(x, y) == 0; }),
               merged.end());
  auto remap = [&](const Polynomial& src, Polynomial& dst) {
    std::vector<std::size_t> pos(src.indets_.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < src.indets_.size(); ++i) {
      while (symt::compare(merged[j], src.indets_[i]) < 0) ++j;
      pos[i] = j;
    }
    dst.indets_ = merged;
    dst.terms_.clear();
    dst.terms_.reserve(src.terms_.size());
    for (const auto& t : src.terms_) {
      Term nt;
      nt.exps.assign(merged.size(), 0);
      for (std::size_t i = 0; i < t.exps.size(); ++i) nt.exps[pos[i]] = t.exps[i];
      nt.coeff = t.coeff;
      dst.terms_.push_back(std::move(nt));
    }
    std::sort(dst.terms_.begin(), dst.terms_.end(),
              [](const Term& x, const Term& y) { return exp_compare(x.exps, y.exps) < 0; });
  };
  remap(a, ua);
  remap(b, ub);
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  Polynomial ua, ub;
  Polynomial::unify(a, b, ua, ub);
  Polynomial out;
  out.indets_ = ua.indets_;
  auto ia = ua.terms_.begin(), ib = ub.terms_.begin();
  while (ia != ua.terms_.end() || ib != ub.terms_.end()) {
    if (ib == ub.terms_.end() ||
        (ia != ua.terms_.end() && exp_compare(ia->exps, ib->exps) < 0)) {
      out.terms_.push_back(*ia++);
    } else if (ia == ua.terms_.end() || exp_compare(ia->exps, ib->exps) > 0) {
      out.terms_.push_back(*ib++);
    } else {
      Rational c = ia->coeff + ib->coeff;
      if (c != 0) out.terms_.push_back(Term{ia->exps, c});
      ++ia;
      ++ib;
    }
  }
  out.strip_unused_indets();
  return out;
}

Polynomial operator-(const Polynomial& a) {
  Polynomial out = a;
  for (auto& t : out.terms_) t.coeff = -t.coeff;
  return out;
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return Polynomial();
  if (a.is_constant()) return b.scaled(a.constant_value());
  if (b.is_constant()) return a.scaled(b.constant_value());
  Polynomial ua, ub;
  Polynomial::unify(a, b, ua, ub);
  struct Cmp {
    bool operator()(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y) const {
      return exp_compare(x, y) < 0;
    }
  };
  std::map<std::vector<std::uint32_t>, Rational, Cmp> acc;
  for (const auto& ta : ua.terms_) {
    for (const auto& tb : ub.terms_) {
      std::vector<std::uint32_t> e(ta.exps.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ta.exps[i] + tb.exps[i];
      acc[std::move(e)] += ta.coeff * tb.coeff;
    }
  }
  Polynomial out;
  out.indets_ = ua.indets_;
  for (auto& [e, c] : acc)
    if (c != 0) out.terms_.push_back(Term{e, c});
  out.strip_unused_indets();
  return out;
}

Polynomial Polynomial::scaled(const Rational& c) const {
  if (c == 0) return Polynomial();
  Polynomial out = *this;
  for (auto& t : out.terms_) t.coeff *= c;
  return out;
}

Polynomial Polynomial::pow(std::uint32_t n) const {
  Polynomial result = Polynomial::constant(Rational(1));
  Polynomial base = *this;
  while (n > 0) {
    if (n & 1u) result = result * base;
    base = (n >>= 1) ? base * base : base;
  }
  return result;
}

int Polynomial::compare(const Polynomial& a, const Polynomial& b) {
  if (a.terms_.size() != b.terms_.size())
    return a.terms_.size() < b.terms_.size() ? -1 : 1;
  if (a.indets_.size() != b.indets_.size())
    return a.indets_.size() < b.indets_.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.indets_.size(); ++i) {
    int c = symt::compare(a.indets_[i], b.indets_[i]);
    if (c != 0) return c;
  }
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    int c = exp_compare(a.terms_[i].exps, b.terms_[i].exps);
    if (c != 0) return c;
    c = rational_compare(a.terms_[i].coeff, b.terms_[i].coeff);
    if (c != 0) return c;
  }
  return 0;
}

Rational Polynomial::content() const {
  if (terms_.empty()) return Rational(0);
  mpz_class num_gcd = 0, den_lcm = 1;
  for (const auto& t : terms_) {
    mpz_class n = t.coeff.get_num();
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), n.get_mpz_t());
    mpz_class d = t.coeff.get_den();
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), d.get_mpz_t());
  }
  Rational c(num_gcd, den_lcm);
  c.canonicalize();
  return c;
}

Polynomial Polynomial::primitive_part() const {
  if (terms_.empty()) return *this;
  Rational c = content();
  if (leading_term().coeff < 0) c = -c;
  return scaled(Rational(1) / c);
}

std::optional<Polynomial> Polynomial::divide_exact(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) return std::nullopt;
  if (a.is_zero()) return Polynomial();
  if (b.is_constant()) return a.scaled(Rational(1) / b.constant_value());
  // leading monomial of b as an indet -> exponent map
  std::map<Indet, std::uint32_t, decltype([](const Indet& x, const Indet& y) {
             return symt::compare(x, y) < 0;
           })>
      lead_b;
  {
    const Term& lb = b.terms_.back();
    for (std::size_t i = 0; i < lb.exps.size(); ++i)
      if (lb.exps[i] > 0) lead_b[b.indets_[i]] = lb.exps[i];
  }
  const Rational& lb_coeff = b.terms_.back().coeff;
  Polynomial rem = a;
  Polynomial quot;
  while (!rem.terms_.empty()) {
    const Term& lr = rem.terms_.back();
    // quotient monomial = lead(rem) / lead(b), or fail
    std::vector<Term> qterm{Term{lr.exps, lr.coeff / lb_coeff}};
    auto pending = lead_b;
    for (std::size_t i = 0; i < lr.exps.size(); ++i) {
      auto it = pending.find(rem.indets_[i]);
      if (it == pending.end()) continue;
      if (qterm[0].exps[i] < it->second) return std::nullopt;
      qterm[0].exps[i] -= it->second;
      pending.erase(it);
    }
    if (!pending.empty()) return std::nullopt;  // divisor uses an indet absent from lead(rem)
    Polynomial qmono = Polynomial::from_terms(rem.indets_, std::move(qterm));
    quot = quot + qmono;
    rem = rem - qmono * b;
  }
  return quot;
}

namespace {

// ---- recursive (univariate-in-main-indet) view used by the gcd ----

struct RecPoly {
  std::vector<Polynomial> coeff;  // coeff[i] multiplies v^i
  long deg() const {
    for (long i = static_cast<long>(coeff.size()) - 1; i >= 0; --i)
      if (!coeff[i].is_zero()) return i;
    return -1;
  }
  void trim() {
    while (!coeff.empty() && coeff.back().is_zero()) coeff.pop_back();
  }
};

RecPoly to_rec(const Polynomial& p, const Indet& v) {
  RecPoly r;
  const auto& indets = p.indets();
  std::size_t vpos = indets.size();
  for (std::size_t i = 0; i < indets.size(); ++i)
    if (compare(indets[i], v) == 0) vpos = i;
  for (const auto& t : p.terms()) {
    std::uint32_t e = vpos < indets.size() ? t.exps[vpos] : 0;
    if (r.coeff.size() <= e) r.coeff.resize(e + 1);
    Term rest = t;
    if (vpos < indets.size()) rest.exps[vpos] = 0;
    r.coeff[e] = r.coeff[e] + Polynomial::from_terms(indets, {rest});
  }
  r.trim();
  return r;
}

Polynomial from_rec(const RecPoly& r, const Indet& v) {
  Polynomial out;
  Polynomial vp = Polynomial::indeterminate(v);
  for (std::size_t i = 0; i < r.coeff.size(); ++i) {
    if (r.coeff[i].is_zero()) continue;
    out = out + r.coeff[i] * vp.pow(static_cast<std::uint32_t>(i));
  }
  return out;
}

RecPoly rec_mul_coeff(const RecPoly& a, const Polynomial& c) {
  RecPoly out;
  out.coeff.reserve(a.coeff.size());
  for (const auto& p : a.coeff) out.coeff.push_back(p * c);
  out.trim();
  return out;
}

RecPoly rec_sub(const RecPoly& a, const RecPoly& b) {
  RecPoly out;
  out.coeff.resize(std::max(a.coeff.size(), b.coeff.size()));
  for (std::size_t i = 0; i < out.coeff.size(); ++i) {
    Polynomial pa = i < a.coeff.size() ? a.coeff[i] : Polynomial();
    Polynomial pb = i < b.coeff.size() ? b.coeff[i] : Polynomial();
    out.coeff[i] = pa - pb;
  }
  out.trim();
  return out;
}

RecPoly rec_shift(const RecPoly& a, std::size_t k) {
  RecPoly out;
  out.coeff.assign(k, Polynomial());
  for (const auto& p : a.coeff) out.coeff.push_back(p);
  out.trim();
  return out;
}

// Pseudo-remainder of a by b in the main indeterminate: the remainder of
// lc(b)^(deg a - deg b + 1) * a divided by b, with the full power applied
// even when intermediate degrees drop by more than one.
RecPoly pseudo_rem(RecPoly a, const RecPoly& b) {
  long db = b.deg();
  assert(db >= 0);
  const Polynomial lb = b.coeff[static_cast<std::size_t>(db)];
  long da = a.deg();
  long steps_needed = da - db + 1;
  long steps = 0;
  while (da >= db && da >= 0) {
    const Polynomial la = a.coeff[static_cast<std::size_t>(da)];
    a = rec_mul_coeff(a, lb);
    ++steps;
    RecPoly sub = rec_shift(rec_mul_coeff(b, la), static_cast<std::size_t>(da - db));
    a = rec_sub(a, sub);
    long nda = a.deg();
    if (nda >= da) throw Error("internal: pseudo-division failed to reduce degree");
    da = nda;
  }
  for (; steps < steps_needed; ++steps) a = rec_mul_coeff(a, lb);
  return a;
}

Polynomial rec_content(const RecPoly& r) {
  Polynomial c;
  for (const auto& p : r.coeff) {
    if (p.is_zero()) continue;
    c = Polynomial::gcd(c, p);
    if (c.is_one()) break;
  }
  return c;
}

RecPoly rec_div_coeff_exact(const RecPoly& a, const Polynomial& c) {
  RecPoly out;
  out.coeff.reserve(a.coeff.size());
  for (const auto& p : a.coeff) {
    auto q = Polynomial::divide_exact(p, c);
    if (!q) throw Error("internal: inexact division in subresultant sequence");
    out.coeff.push_back(*q);
  }
  out.trim();
  return out;
}

}  // namespace

namespace {

// largest monomial dividing every term
Polynomial monomial_content(const Polynomial& p) {
  std::vector<std::uint32_t> mins = p.terms().front().exps;
  for (const auto& t : p.terms())
    for (std::size_t i = 0; i < mins.size(); ++i) mins[i] = std::min(mins[i], t.exps[i]);
  return Polynomial::from_terms(p.indets(), {Term{mins, Rational(1)}});
}

Polynomial monomial_gcd(const Polynomial& a, const Polynomial& b) {
  Polynomial g = Polynomial::constant(Rational(1));
  for (const auto& v : a.indets()) {
    long d = std::min(a.degree_in(v), b.degree_in(v));
    if (d > 0) g = g * Polynomial::indeterminate(v).pow(static_cast<std::uint32_t>(d));
  }
  return g;
}

}  // namespace

Polynomial Polynomial::gcd(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero()) return b.primitive_part();
  if (b.is_zero()) return a.primitive_part();
  if (a.is_constant() || b.is_constant()) return Polynomial::constant(Rational(1));
  if (compare(a.primitive_part(), b.primitive_part()) == 0) return a.primitive_part();

  if (a.terms_.size() == 1 || b.terms_.size() == 1)
    return monomial_gcd(monomial_content(a), monomial_content(b));

  // split off monomial contents first; they reduce to exponent arithmetic
  Polynomial ma = monomial_content(a);
  Polynomial mb = monomial_content(b);
  if (!ma.is_constant() || !mb.is_constant()) {
    Polynomial ra = *divide_exact(a, ma);
    Polynomial rb = *divide_exact(b, mb);
    return (monomial_gcd(ma, mb) * gcd(ra, rb)).primitive_part();
  }

  // common indeterminates only; a gcd cannot involve the others
  std::vector<Indet> common;
  for (const auto& v : a.indets_)
    if (b.degree_in(v) > 0 && a.degree_in(v) > 0) common.push_back(v);
  if (common.empty()) return Polynomial::constant(Rational(1));

  // one input often divides the other in fraction reduction; try it
  if (a.terms_.size() <= b.terms_.size()) {
    if (divide_exact(b, a)) return a.primitive_part();
  } else if (divide_exact(a, b)) {
    return b.primitive_part();
  }

  const Indet* main = &common[0];
  long best = std::max(a.degree_in(common[0]), b.degree_in(common[0]));
  for (const auto& v : common) {
    long d = std::max(a.degree_in(v), b.degree_in(v));
    if (d < best) {
      best = d;
      main = &v;
    }
  }

  RecPoly ra = to_rec(a.primitive_part(), *main);
  RecPoly rb = to_rec(b.primitive_part(), *main);
  Polynomial ca = rec_content(ra);
  Polynomial cb = rec_content(rb);
  RecPoly pa = rec_div_coeff_exact(ra, ca);
  RecPoly pb = rec_div_coeff_exact(rb, cb);
  Polynomial cont_gcd = gcd(ca, cb);

  if (pa.deg() < pb.deg()) std::swap(pa, pb);

  // subresultant polynomial remainder sequence
  Polynomial g = Polynomial::constant(Rational(1));
  Polynomial h = Polynomial::constant(Rational(1));
  while (true) {
    long delta = pa.deg() - pb.deg();
    RecPoly r = pseudo_rem(pa, pb);
    if (r.deg() < 0) break;
    if (r.deg() == 0) {
      pb = r;
      break;
    }
    Polynomial divisor = g;
    for (long i = 0; i < delta; ++i) divisor = divisor * h;
    pa = pb;
    pb = rec_div_coeff_exact(r, divisor);
    g = pa.coeff[static_cast<std::size_t>(pa.deg())];
    if (delta >= 1) {
      Polynomial gd = g;
      for (long i = 1; i < delta; ++i) gd = gd * g;
      if (delta == 1) {
        h = gd;
      } else {
        auto q = divide_exact(gd, h.pow(static_cast<std::uint32_t>(delta - 1)));
        if (!q) throw Error("internal: inexact division in subresultant sequence");
        h = *q;
      }
    }
  }

  if (pb.deg() <= 0) return cont_gcd.is_zero() ? Polynomial::constant(Rational(1)) : cont_gcd;
  Polynomial cand = from_rec(rec_div_coeff_exact(pb, rec_content(pb)), *main);
  return (cont_gcd * cand).primitive_part();
}

}  // namespace symt
