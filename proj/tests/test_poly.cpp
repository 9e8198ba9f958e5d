#include "sgcert/poly.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sgcert/test_function.hpp"

using namespace sgcert;

namespace {

Exponents e1(int a) { return Exponents{a}; }
Exponents e2(int a, int b) { return Exponents{a, b}; }

// independent term-by-term evaluator used as the parsing oracle
double eval_terms(const std::vector<std::pair<Exponents, double>>& terms,
                  const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& [e, c] : terms) {
    double m = c;
    for (size_t i = 0; i < e.size(); ++i) m *= std::pow(x[i], e[i]);
    s += m;
  }
  return s;
}

}  // namespace

TEST(Poly, ParseLogisticProfile) {
  const PolyExpr p = parse_poly("x1*(1-x1)", 1);
  ASSERT_EQ(p.terms().size(), 2u);
  EXPECT_DOUBLE_EQ(p.terms().at(e1(1)), 1.0);
  EXPECT_DOUBLE_EQ(p.terms().at(e1(2)), -1.0);
}

TEST(Poly, ParseConstant) {
  const PolyExpr p = parse_poly("0.5", 2);
  ASSERT_EQ(p.terms().size(), 1u);
  EXPECT_DOUBLE_EQ(p.terms().at(e2(0, 0)), 0.5);
}

TEST(Poly, ParseBivariateAgainstTermOracle) {
  const PolyExpr p = parse_poly("x1*x2 - x1^2*x2", 2);
  ASSERT_EQ(p.terms().size(), 2u);
  EXPECT_DOUBLE_EQ(p.terms().at(e2(1, 1)), 1.0);
  EXPECT_DOUBLE_EQ(p.terms().at(e2(2, 1)), -1.0);

  std::mt19937 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const std::vector<double> x{u(gen), u(gen)};
    const double expected = eval_terms({{e2(1, 1), 1.0}, {e2(2, 1), -1.0}}, x);
    EXPECT_NEAR(p.eval(x), expected, 1e-14);
  }
}

TEST(Poly, ParseErrors) {
  EXPECT_THROW(parse_poly("x3 + 1", 2), PolyParseError);
  EXPECT_THROW(parse_poly("x1^-2", 1), PolyParseError);
  EXPECT_THROW(parse_poly("x1^1.5", 1), PolyParseError);
  EXPECT_THROW(parse_poly("x1 + ", 1), PolyParseError);
  EXPECT_THROW(parse_poly("(x1", 1), PolyParseError);
  try {
    parse_poly("x1 + $", 1);
    FAIL() << "expected parse error";
  } catch (const PolyParseError& err) {
    EXPECT_EQ(err.position(), 5u);
  }
}

TEST(Poly, PrintParseRoundTripIsIdempotent) {
  const char* cases[] = {
      "x1*(1-x1)",
      "0.5",
      "x1*x2 - x1^2*x2",
      "2*x1^3 - 0.25*x2 + 1",
      "(x1+x2)^3 - x1^3",
  };
  for (const char* text : cases) {
    const PolyExpr p = parse_poly(text, 2);
    const PolyExpr q = parse_poly(p.str(), 2);
    EXPECT_EQ(p, q) << text << " -> " << p.str();
    EXPECT_EQ(p.str(), q.str());
  }
}

TEST(Poly, PartialPowerRule) {
  const PolyExpr p = parse_poly("x1*(1-x1)", 1);
  const PolyExpr dp = p.partial(1);
  EXPECT_EQ(dp, parse_poly("1-2*x1", 1));
  EXPECT_TRUE(PolyExpr::constant(1, 3.0).partial(1).is_zero());
}

TEST(Poly, RepeatedPartialsMatchFiniteDifferences) {
  // d1 d1 d2 of x1^2 x2 is the constant 2
  const PolyExpr p = parse_poly("x1^2*x2", 2);
  const PolyExpr ddd = p.partial(Exponents{2, 1});
  ASSERT_EQ(ddd.terms().size(), 1u);
  EXPECT_DOUBLE_EQ(ddd.terms().at(e2(0, 0)), 2.0);

  // central finite differences at random interior points
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  const double h = 1e-5;
  for (int k = 0; k < 5; ++k) {
    const double x = u(gen), y = u(gen);
    const PolyExpr d1 = p.partial(1);
    const double fd =
        (p.eval({x + h, y}) - p.eval({x - h, y})) / (2.0 * h);
    EXPECT_NEAR(d1.eval({x, y}), fd, 1e-8);
  }
}

TEST(Poly, PartialAxisOutOfRange) {
  const PolyExpr p = parse_poly("x1", 1);
  EXPECT_THROW(p.partial(0), std::invalid_argument);
  EXPECT_THROW(p.partial(2), std::invalid_argument);
}

TEST(Poly, NoZeroTermsStored) {
  const PolyExpr p = parse_poly("x1 - x1", 1);
  EXPECT_TRUE(p.is_zero());
  const PolyExpr q = parse_poly("x1*x1 - x1^2 + 1", 1);
  ASSERT_EQ(q.terms().size(), 1u);
}

TEST(Poly, SubstituteFreezesAxis) {
  const PolyExpr p = parse_poly("x1*x2 + x2^2", 2);
  const PolyExpr at1 = p.substitute(1, 1.0);  // x2 + x2^2
  EXPECT_DOUBLE_EQ(at1.eval({0.0, 0.5}), 0.75);
  EXPECT_DOUBLE_EQ(at1.eval({0.9, 0.5}), 0.75);  // frozen axis is inert
}

TEST(Poly, CompiledMatchesSymbolic) {
  const PolyExpr p = parse_poly("3*x1^2*x2 - x2^3 + 0.5", 2);
  const CompiledPoly cp(p);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> x{u(gen), u(gen)};
    EXPECT_NEAR(cp.eval(x.data()), p.eval(x), 1e-15);
  }
}

TEST(TestFunction, CosProductPartials) {
  const TestFunction f = TestFunction::cos_product(2, 1.0);
  const std::vector<double> x{0.3, 0.7};
  const double pi = std::numbers::pi;
  EXPECT_NEAR(f.eval(x), std::cos(pi * 0.3) * std::cos(pi * 0.7), 1e-15);
  // d/dx1: -pi sin(pi x1) cos(pi x2)
  EXPECT_NEAR(f.partial_eval({1, 0}, x), -pi * std::sin(pi * 0.3) * std::cos(pi * 0.7),
              1e-12);
  // d2/dx1 dx2: pi^2 sin sin
  EXPECT_NEAR(f.partial_eval({1, 1}, x), pi * pi * std::sin(pi * 0.3) * std::sin(pi * 0.7),
              1e-12);
  // finite-difference cross-check of the third pure derivative
  const double h = 1e-4;
  const double fd3 = (f.eval({0.3 + 2 * h, 0.7}) - 2 * f.eval({0.3 + h, 0.7}) +
                      2 * f.eval({0.3 - h, 0.7}) - f.eval({0.3 - 2 * h, 0.7})) /
                     (2 * h * h * h);
  EXPECT_NEAR(f.partial_eval({3, 0}, x), fd3, 1e-4);
}

TEST(TestFunction, CosProductNormClosedForm) {
  const double pi = std::numbers::pi;
  const TestFunction f = TestFunction::parse("cosprod/pi2", 3);
  ASSERT_TRUE(f.cm_norm_closed_form(2).has_value());
  EXPECT_NEAR(*f.cm_norm_closed_form(2), 1.0, 1e-15);
  EXPECT_NEAR(*f.cm_norm_closed_form(0), 1.0 / (pi * pi), 1e-15);
}

TEST(TestFunction, ParsePolynomial) {
  const TestFunction f = TestFunction::parse("x1 + x2", 2);
  EXPECT_TRUE(f.is_polynomial());
  EXPECT_DOUBLE_EQ(f.eval({0.25, 0.5}), 0.75);
}
