#pragma once

// Test payloads f : [0,1]^d -> R with exact partial derivatives up to order 3.
// Two families are supported: sparse polynomials (symbolic partials) and
// scaled cosine products c * prod_i cos(pi x_i) (closed-form partials).

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sgcert/poly.hpp"

namespace sgcert {

class TestFunction {
 public:
  static TestFunction polynomial(PolyExpr p) { return TestFunction(std::move(p)); }

  static TestFunction cos_product(int dim, double scale) {
    if (dim < 1) throw std::invalid_argument("cos_product: dim must be >= 1");
    return TestFunction(CosProduct{dim, scale});
  }

  /// Accepts either a polynomial expression in x1..xd or one of the named
  /// forms "cosprod", "cosprod/pi2" (scale 1/pi^2), "cosprod:<scale>".
  static TestFunction parse(const std::string& text, int dim) {
    if (text.rfind("cosprod", 0) == 0) {
      std::string rest = text.substr(7);
      double scale = 1.0;
      if (rest == "/pi2") {
        scale = 1.0 / (std::numbers::pi * std::numbers::pi);
      } else if (!rest.empty() && rest[0] == ':') {
        scale = std::strtod(rest.c_str() + 1, nullptr);
      } else if (!rest.empty()) {
        throw std::invalid_argument("unknown test function: " + text);
      }
      return cos_product(dim, scale);
    }
    return polynomial(parse_poly(text, dim));
  }

  int dim() const {
    if (const auto* p = std::get_if<PolyExpr>(&body_)) return p->arity();
    return std::get<CosProduct>(body_).dim;
  }

  bool is_polynomial() const { return std::holds_alternative<PolyExpr>(body_); }

  const PolyExpr& poly() const { return std::get<PolyExpr>(body_); }

  bool is_cos_product() const { return std::holds_alternative<CosProduct>(body_); }

  double cos_product_scale() const { return std::get<CosProduct>(body_).scale; }

  double eval(const std::vector<double>& x) const {
    return partial_eval(Exponents(x.size(), 0), x);
  }

  /// Exact value of the partial derivative d^alpha f at x.
  double partial_eval(const Exponents& alpha, const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim() ||
        static_cast<int>(alpha.size()) != dim())
      throw std::invalid_argument("TestFunction: dimension mismatch");
    if (const auto* p = std::get_if<PolyExpr>(&body_))
      return p->partial(alpha).eval(x);
    const auto& cp = std::get<CosProduct>(body_);
    double v = cp.scale;
    for (size_t i = 0; i < x.size(); ++i)
      v *= axis_cos_derivative(x[i], alpha[i]);
    return v;
  }

  /// Exact symbolic partial when polynomial; cosine products report the
  /// closed form through partial_eval instead.
  PolyExpr partial_poly(const Exponents& alpha) const {
    return poly().partial(alpha);
  }

  std::string describe() const {
    if (const auto* p = std::get_if<PolyExpr>(&body_)) return p->str();
    const auto& cp = std::get<CosProduct>(body_);
    return "cosprod:" + PolyExpr::format_double(cp.scale);
  }

  /// For cosine products the C^m norm is |c| * pi^m (every shifted cosine
  /// factor attains magnitude 1 on [0,1]).  Polynomials have no closed form
  /// here; callers maximize exact partials over a grid.
  std::optional<double> cm_norm_closed_form(int m) const {
    if (const auto* cp = std::get_if<CosProduct>(&body_)) {
      double v = std::abs(cp->scale);
      for (int k = 0; k < m; ++k) v *= std::numbers::pi;
      return v;
    }
    return std::nullopt;
  }

 private:
  struct CosProduct {
    int dim;
    double scale;
  };

  explicit TestFunction(PolyExpr p) : body_(std::move(p)) {}
  explicit TestFunction(CosProduct c) : body_(c) {}

  // d^k/dx^k cos(pi x) = pi^k cos(pi x + k pi/2)
  static double axis_cos_derivative(double x, int k) {
    const double pi = std::numbers::pi;
    double scale = 1.0;
    for (int r = 0; r < k; ++r) scale *= pi;
    switch (k % 4) {
      case 0: return scale * std::cos(pi * x);
      case 1: return -scale * std::sin(pi * x);
      case 2: return -scale * std::cos(pi * x);
      default: return scale * std::sin(pi * x);
    }
  }

  std::variant<PolyExpr, CosProduct> body_;
};

}  // namespace sgcert
