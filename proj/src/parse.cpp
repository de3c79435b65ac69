#include <cctype>
#include <sstream>

#include "symtensor/expr.hpp"

namespace symt {

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;

  explicit Parser(const std::string& t) : text(t) {}

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eof() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw SyntaxError(std::string("expected '") + c + "'", pos);
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    if (pos >= text.size() || !(std::isalpha(static_cast<unsigned char>(text[pos]))))
      throw SyntaxError("expected identifier", pos);
    ++pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    return text.substr(start, pos - start);
  }

  mpz_class integer() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start) throw SyntaxError("expected integer", pos);
    return mpz_class(text.substr(start, pos - start));
  }

  long exponent() {
    skip_ws();
    bool paren = accept('(');
    bool neg = accept('-');
    mpz_class v = integer();
    if (paren) expect(')');
    if (!v.fits_slong_p()) throw SyntaxError("exponent too large", pos);
    long e = v.get_si();
    return neg ? -e : e;
  }

  RationalExpr expression() {
    RationalExpr lhs = term();
    while (true) {
      if (accept('+')) {
        lhs += term();
      } else if (accept('-')) {
        lhs -= term();
      } else {
        return lhs;
      }
    }
  }

  RationalExpr term() {
    RationalExpr lhs = unary();
    while (true) {
      if (accept('*')) {
        lhs *= unary();
      } else if (accept('/')) {
        RationalExpr rhs = unary();
        if (rhs.is_zero()) throw ZeroDenominator();
        lhs /= rhs;
      } else {
        return lhs;
      }
    }
  }

  RationalExpr unary() {
    if (accept('-')) return -unary();
    return power();
  }

  RationalExpr power() {
    RationalExpr base = primary();
    if (accept('^')) {
      long e = exponent();
      if (e < 0 && base.is_zero()) throw ZeroDenominator();
      return base.pow(e);
    }
    return base;
  }

  std::vector<RationalExpr> call_args() {
    std::vector<RationalExpr> args;
    expect('(');
    args.push_back(expression());
    while (accept(',')) args.push_back(expression());
    expect(')');
    return args;
  }

  RationalExpr primary() {
    skip_ws();
    if (pos >= text.size()) throw SyntaxError("unexpected end of input", pos);
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      return RationalExpr::constant(Rational(integer()));
    }
    if (c == '(') {
      ++pos;
      RationalExpr e = expression();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      // D[f,2,3](args) is the derivative notation; D alone is a variable
      if (c == 'D' && pos + 1 < text.size() && text[pos + 1] == '[') {
        pos += 2;
        std::string name = ident();
        std::vector<std::size_t> slots;
        while (accept(',')) {
          mpz_class idx = integer();
          if (idx < 1) throw SyntaxError("derivative slot must be >= 1", pos);
          slots.push_back(idx.get_ui());
        }
        expect(']');
        if (slots.empty()) throw SyntaxError("derivative needs at least one slot", pos);
        std::vector<RationalExpr> args = call_args();
        FunctionAtom a;
        a.name = name;
        a.args = std::move(args);
        a.index.assign(a.args.size(), 0);
        for (std::size_t s : slots) {
          if (s > a.args.size())
            throw SyntaxError("derivative slot exceeds argument count", pos);
          a.index[s - 1] += 1;
        }
        return RationalExpr::atom(std::move(a));
      }
      std::string name = ident();
      if (peek() == '(') {
        FunctionAtom a;
        a.name = name;
        a.args = call_args();
        a.index.assign(a.args.size(), 0);
        return RationalExpr::atom(std::move(a));
      }
      return RationalExpr::variable(name);
    }
    throw SyntaxError("unexpected character", pos);
  }
};

std::string rational_str(const Rational& r) { return r.get_str(); }

std::string atom_str(const FunctionAtom& a) {
  std::ostringstream out;
  bool plain = true;
  for (auto i : a.index)
    if (i != 0) plain = false;
  if (plain) {
    out << a.name;
  } else {
    out << "D[" << a.name;
    for (std::size_t s = 0; s < a.index.size(); ++s)
      for (std::uint32_t k = 0; k < a.index[s]; ++k) out << ',' << (s + 1);
    out << ']';
  }
  out << '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) out << ',';
    out << to_string(a.args[i]);
  }
  out << ')';
  return out.str();
}

std::string indet_str(const Indet& v) {
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  return atom_str(std::get<FunctionAtom>(v));
}

// |coeff| * monomial, without sign
std::string term_str(const std::vector<Indet>& indets, const Term& t) {
  std::ostringstream out;
  Rational c = abs(t.coeff);
  bool monomial_empty = true;
  for (auto e : t.exps)
    if (e > 0) monomial_empty = false;
  bool printed = false;
  if (c != 1 || monomial_empty) {
    out << rational_str(c);
    printed = true;
  }
  for (std::size_t i = 0; i < t.exps.size(); ++i) {
    if (t.exps[i] == 0) continue;
    if (printed) out << '*';
    out << indet_str(indets[i]);
    if (t.exps[i] > 1) out << '^' << t.exps[i];
    printed = true;
  }
  return out.str();
}

}  // namespace

std::string to_string(const Polynomial& p) {
  if (p.is_zero()) return "0";
  std::ostringstream out;
  const auto& terms = p.terms();
  for (std::size_t k = terms.size(); k-- > 0;) {
    const Term& t = terms[k];
    bool first = (k + 1 == terms.size());
    if (first) {
      if (t.coeff < 0) out << '-';
    } else {
      out << (t.coeff < 0 ? " - " : " + ");
    }
    out << term_str(p.indets(), t);
  }
  return out.str();
}

std::string to_string(const RationalExpr& e) {
  if (e.is_polynomial()) return to_string(e.num());
  return "(" + to_string(e.num()) + ")/(" + to_string(e.den()) + ")";
}

std::string RationalExpr::str() const { return to_string(*this); }

RationalExpr parse_expr(const std::string& text) {
  Parser p(text);
  RationalExpr e = p.expression();
  if (!p.eof()) throw SyntaxError("trailing input", p.pos);
  return e;
}

}  // namespace symt
