#pragma once

// Sparse multivariate polynomials over the unit cube with exact symbolic
// partial derivatives. Terms are kept in a map ordered lexicographically on
// the exponent vector, which fixes the canonical printing/hashing order.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sgcert {

/// Exponent vector; length equals the arity of the owning polynomial.
using Exponents = std::vector<int>;

inline int exponents_order(const Exponents& e) {
  int s = 0;
  for (int k : e) s += k;
  return s;
}

class PolyExpr {
 public:
  using TermMap = std::map<Exponents, double>;

  explicit PolyExpr(int arity) : arity_(arity) {
    if (arity < 1) throw std::invalid_argument("PolyExpr: arity must be >= 1");
  }

  static PolyExpr constant(int arity, double c) {
    PolyExpr p(arity);
    p.add_term(Exponents(static_cast<size_t>(arity), 0), c);
    return p;
  }

  /// Monomial x_axis (axis is 1-based, matching the x1..xd grammar).
  static PolyExpr variable(int arity, int axis) {
    PolyExpr p(arity);
    if (axis < 1 || axis > arity)
      throw std::invalid_argument("PolyExpr::variable: axis out of range");
    Exponents e(static_cast<size_t>(arity), 0);
    e[static_cast<size_t>(axis - 1)] = 1;
    p.add_term(std::move(e), 1.0);
    return p;
  }

  int arity() const { return arity_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int total_degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, exponents_order(e));
    return d;
  }

  /// Affine means total degree <= 1; such polynomials attain extrema at
  /// cube corners, which validation exploits for exact boundary checks.
  bool is_affine() const { return total_degree() <= 1; }

  void add_term(Exponents e, double c) {
    if (e.size() != static_cast<size_t>(arity_))
      throw std::invalid_argument("PolyExpr::add_term: exponent length mismatch");
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      if (c != 0.0) terms_.emplace(std::move(e), c);
    } else {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double eval(const std::vector<double>& x) const { return eval(x.data(), x.size()); }

  double eval(const double* x, size_t n) const {
    if (n != static_cast<size_t>(arity_))
      throw std::invalid_argument("PolyExpr::eval: point dimension mismatch");
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
      double m = c;
      for (size_t i = 0; i < e.size(); ++i) m *= ipow(x[i], e[i]);
      s += m;
    }
    return s;
  }

  /// Exact symbolic derivative along the given 1-based axis.
  PolyExpr partial(int axis) const {
    if (axis < 1 || axis > arity_)
      throw std::invalid_argument("PolyExpr::partial: axis out of range");
    const size_t k = static_cast<size_t>(axis - 1);
    PolyExpr out(arity_);
    for (const auto& [e, c] : terms_) {
      if (e[k] == 0) continue;
      Exponents d = e;
      d[k] -= 1;
      out.add_term(std::move(d), c * static_cast<double>(e[k]));
    }
    return out;
  }

  /// Repeated partials: alpha is a multiindex of length arity.
  PolyExpr partial(const Exponents& alpha) const {
    if (alpha.size() != static_cast<size_t>(arity_))
      throw std::invalid_argument("PolyExpr::partial: multiindex length mismatch");
    PolyExpr out = *this;
    for (size_t k = 0; k < alpha.size(); ++k)
      for (int r = 0; r < alpha[k]; ++r) out = out.partial(static_cast<int>(k) + 1);
    return out;
  }

  /// Freeze x_axis (1-based) to a value; the result keeps the same arity
  /// with the frozen variable no longer appearing.
  PolyExpr substitute(int axis, double value) const {
    if (axis < 1 || axis > arity_)
      throw std::invalid_argument("PolyExpr::substitute: axis out of range");
    const size_t k = static_cast<size_t>(axis - 1);
    PolyExpr out(arity_);
    for (const auto& [e, c] : terms_) {
      Exponents d = e;
      const int p = d[k];
      d[k] = 0;
      out.add_term(std::move(d), c * ipow(value, p));
    }
    return out;
  }

  PolyExpr operator-() const {
    PolyExpr out(arity_);
    for (const auto& [e, c] : terms_) out.add_term(e, -c);
    return out;
  }

  friend PolyExpr operator+(const PolyExpr& a, const PolyExpr& b) {
    check_same_arity(a, b);
    PolyExpr out = a;
    for (const auto& [e, c] : b.terms_) out.add_term(e, c);
    return out;
  }

  friend PolyExpr operator-(const PolyExpr& a, const PolyExpr& b) {
    check_same_arity(a, b);
    PolyExpr out = a;
    for (const auto& [e, c] : b.terms_) out.add_term(e, -c);
    return out;
  }

  friend PolyExpr operator*(const PolyExpr& a, const PolyExpr& b) {
    check_same_arity(a, b);
    PolyExpr out(a.arity_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        Exponents e = ea;
        for (size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
        out.add_term(std::move(e), ca * cb);
      }
    }
    return out;
  }

  friend PolyExpr operator*(double s, const PolyExpr& a) {
    PolyExpr out(a.arity_);
    for (const auto& [e, c] : a.terms_) out.add_term(e, s * c);
    return out;
  }

  PolyExpr pow(int n) const {
    if (n < 0) throw std::invalid_argument("PolyExpr::pow: negative exponent");
    PolyExpr out = constant(arity_, 1.0);
    for (int r = 0; r < n; ++r) out = out * (*this);
    return out;
  }

  bool operator==(const PolyExpr& o) const {
    return arity_ == o.arity_ && terms_ == o.terms_;
  }

  /// Canonical text form; parse(str()) reproduces the same term map.
  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      double mag = std::abs(c);
      if (first) {
        if (c < 0) out += "-";
        first = false;
      } else {
        out += (c < 0) ? " - " : " + ";
      }
      const bool has_vars = exponents_order(e) > 0;
      if (!has_vars || mag != 1.0) {
        out += format_double(mag);
        if (has_vars) out += "*";
      }
      bool first_var = true;
      for (size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        if (!first_var) out += "*";
        first_var = false;
        out += "x" + std::to_string(i + 1);
        if (e[i] > 1) out += "^" + std::to_string(e[i]);
      }
    }
    return out;
  }

  static std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec <= 16; ++prec) {
      char probe[40];
      std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
      if (std::strtod(probe, nullptr) == v) return probe;
    }
    return buf;
  }

 private:
  static double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
  }

  static void check_same_arity(const PolyExpr& a, const PolyExpr& b) {
    if (a.arity_ != b.arity_)
      throw std::invalid_argument("PolyExpr: arity mismatch in arithmetic");
  }

  int arity_;
  TermMap terms_;
};

/// Flattened term list for hot loops (SDE stepping); skips zero exponents so
/// sparse drift fields such as kappa*(xbar - x_i) evaluate in O(#terms).
struct CompiledPoly {
  struct Term {
    double coeff;
    std::vector<std::pair<int, int>> vars;  // (0-based axis, power >= 1)
  };
  int arity = 0;
  std::vector<Term> terms;

  CompiledPoly() = default;

  explicit CompiledPoly(const PolyExpr& p) : arity(p.arity()) {
    terms.reserve(p.terms().size());
    for (const auto& [e, c] : p.terms()) {
      Term t;
      t.coeff = c;
      for (size_t i = 0; i < e.size(); ++i)
        if (e[i] > 0) t.vars.emplace_back(static_cast<int>(i), e[i]);
      terms.push_back(std::move(t));
    }
  }

  bool empty() const { return terms.empty(); }

  double eval(const double* x) const {
    double s = 0.0;
    for (const Term& t : terms) {
      double m = t.coeff;
      for (const auto& [axis, p] : t.vars) {
        double v = x[axis];
        double f = v;
        for (int r = 1; r < p; ++r) f *= v;
        m *= f;
      }
      s += m;
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// Expression parser.  Grammar (whitespace insignificant):
//   expr    := term (('+' | '-') term)*
//   term    := factor ('*' factor)*
//   factor  := ('+' | '-')* power
//   power   := primary ('^' nonneg-integer)?
//   primary := number | 'x' index | '(' expr ')'
// Numbers are decimal literals with optional fraction and exponent.
// ---------------------------------------------------------------------------

class PolyParseError : public std::invalid_argument {
 public:
  PolyParseError(size_t pos, const std::string& what)
      : std::invalid_argument("parse error at position " + std::to_string(pos) +
                              ": " + what),
        pos_(pos) {}
  size_t position() const { return pos_; }

 private:
  size_t pos_;
};

namespace detail {

class PolyParser {
 public:
  PolyParser(const std::string& text, int arity) : text_(text), arity_(arity) {}

  PolyExpr parse() {
    PolyExpr p = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) throw PolyParseError(pos_, "unexpected trailing input");
    return p;
  }

 private:
  PolyExpr parse_expr() {
    PolyExpr acc = parse_term();
    for (;;) {
      skip_ws();
      if (peek() == '+') {
        ++pos_;
        acc = acc + parse_term();
      } else if (peek() == '-') {
        ++pos_;
        acc = acc - parse_term();
      } else {
        return acc;
      }
    }
  }

  PolyExpr parse_term() {
    PolyExpr acc = parse_factor();
    for (;;) {
      skip_ws();
      if (peek() == '*') {
        ++pos_;
        acc = acc * parse_factor();
      } else {
        return acc;
      }
    }
  }

  PolyExpr parse_factor() {
    skip_ws();
    int sign = 1;
    while (peek() == '+' || peek() == '-') {
      if (peek() == '-') sign = -sign;
      ++pos_;
      skip_ws();
    }
    PolyExpr p = parse_power();
    return (sign < 0) ? -p : p;
  }

  PolyExpr parse_power() {
    PolyExpr base = parse_primary();
    skip_ws();
    if (peek() != '^') return base;
    ++pos_;
    skip_ws();
    const size_t at = pos_;
    if (peek() == '-') throw PolyParseError(at, "negative exponent not allowed");
    if (!std::isdigit(static_cast<unsigned char>(peek())))
      throw PolyParseError(at, "expected nonnegative integer exponent");
    long n = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      n = n * 10 + (text_[pos_] - '0');
      if (n > 64) throw PolyParseError(at, "exponent too large");
      ++pos_;
    }
    if (peek() == '.') throw PolyParseError(at, "non-integer exponent not allowed");
    return base.pow(static_cast<int>(n));
  }

  PolyExpr parse_primary() {
    skip_ws();
    const char c = peek();
    if (c == '(') {
      ++pos_;
      PolyExpr p = parse_expr();
      skip_ws();
      if (peek() != ')') throw PolyParseError(pos_, "expected ')'");
      ++pos_;
      return p;
    }
    if (c == 'x') {
      const size_t at = pos_;
      ++pos_;
      if (!std::isdigit(static_cast<unsigned char>(peek())))
        throw PolyParseError(pos_, "expected variable index after 'x'");
      long idx = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        idx = idx * 10 + (text_[pos_] - '0');
        if (idx > 1000000) throw PolyParseError(at, "variable index too large");
        ++pos_;
      }
      if (idx < 1 || idx > arity_)
        throw PolyParseError(at, "variable index out of range (arity " +
                                     std::to_string(arity_) + ")");
      return PolyExpr::variable(arity_, static_cast<int>(idx));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const size_t at = pos_;
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw PolyParseError(at, "malformed number");
      pos_ += static_cast<size_t>(end - begin);
      return PolyExpr::constant(arity_, v);
    }
    if (c == '\0') throw PolyParseError(pos_, "unexpected end of input");
    throw PolyParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  const std::string& text_;
  int arity_;
  size_t pos_ = 0;
};

}  // namespace detail

inline PolyExpr parse_poly(const std::string& text, int arity) {
  if (arity < 1) throw std::invalid_argument("parse_poly: arity must be >= 1");
  return detail::PolyParser(text, arity).parse();
}

}  // namespace sgcert
