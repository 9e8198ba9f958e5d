#include "sgcert/constants.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sgcert;

TEST(SupNorm, AffineExactAtEndpoints) {
  // |1 - 2x| peaks at both endpoints
  EXPECT_DOUBLE_EQ(sup_norm(parse_poly("1 - 2*x1", 1), 11), 1.0);
}

TEST(SupNorm, ZeroPolynomial) {
  EXPECT_DOUBLE_EQ(sup_norm(PolyExpr(1), 101), 0.0);
}

TEST(SupNorm, InteriorMaximumOnGrid) {
  // x(1-x) peaks at 0.5, which a 101-point grid contains
  EXPECT_DOUBLE_EQ(sup_norm(parse_poly("x1*(1-x1)", 1), 101), 0.25);
}

TEST(SupNorm, RefinementIsMonotone) {
  const PolyExpr p = parse_poly("x1^3*(1-x1)^2", 1);
  double prev = 0.0;
  for (int n : {11, 21, 41, 81, 161}) {
    const double cur = sup_norm(p, n);
    EXPECT_GE(cur, prev - 1e-18);
    prev = cur;
  }
}

TEST(SupNorm, HighDimensionSampledMode) {
  // affine shortcut handles the exact corner max even in high dimension
  BuiltinParams params;
  params.kappa = 1.0;
  const CoefficientSystem sys = builtin_system("migration", params, 12);
  const PolyExpr& b0 = sys.drift[0];
  const double expected = b0.is_affine() ? sup_norm(b0, 3) : 0.0;
  EXPECT_GT(expected, 0.0);
  // non-affine high-dimensional polynomial goes through the sampling path
  PolyExpr q(8);
  Exponents e(8, 0);
  e[0] = 2;
  q.add_term(e, 1.0);
  EXPECT_NEAR(sup_norm(q, 101), 1.0, 1e-12);
}

TEST(Constants, WrightFisher) {
  const ConstantsReport rep = compute_constants(builtin_system("wright-fisher", {}, 3));
  for (int m = 0; m < 4; ++m) EXPECT_DOUBLE_EQ(rep.lambda[static_cast<size_t>(m)], 0.0);
  EXPECT_DOUBLE_EQ(rep.mu[0], 0.0);
  EXPECT_DOUBLE_EQ(rep.mu[1], 0.0);
  EXPECT_DOUBLE_EQ(rep.mu[2], 1.0);  // a'' = -2, mu2 = (1/2)*2
  EXPECT_DOUBLE_EQ(rep.mu[3], 3.0);  // a''' = 0, mu3 = 0 + (3/2)*2
  for (const auto& nu : rep.nu_per_coordinate) {
    EXPECT_DOUBLE_EQ(nu.nu[2], 1.0);
    EXPECT_DOUBLE_EQ(nu.nu[3], 3.0);
    EXPECT_DOUBLE_EQ(nu.nu_tilde3, 3.0);
  }
}

TEST(Constants, LogisticDrift) {
  BuiltinParams params;
  params.c = 2.5;
  const ConstantsReport rep = compute_constants(builtin_system("logistic-drift", params, 1));
  EXPECT_DOUBLE_EQ(rep.lambda[1], 2.5);      // sup |c(1-2x)| = |c|
  EXPECT_DOUBLE_EQ(rep.lambda[2], 5.0);      // sup |-2c| = 2|c|
  EXPECT_DOUBLE_EQ(rep.lambda[3], 5.0);      // third partials vanish
}

TEST(Constants, MigrationClosedForm) {
  BuiltinParams params;
  params.kappa = 1.0;
  for (int d : {1, 2, 4, 8}) {
    const ConstantsReport rep = compute_constants(builtin_system("migration", params, d));
    const double expected = 2.0 * (1.0 - 1.0 / d);
    for (int m = 1; m <= 3; ++m)
      EXPECT_NEAR(rep.lambda[static_cast<size_t>(m)], expected, 1e-13) << "d=" << d;
  }
}

TEST(Constants, MigrationDimensionIndependenceBound) {
  // lambda_m <= 2 kappa uniformly in d
  BuiltinParams params;
  params.kappa = 1.0;
  for (int d = 1; d <= 1024; d *= 2) {
    const ConstantsReport rep = compute_constants(builtin_system("migration", params, d));
    for (int m = 1; m <= 3; ++m)
      EXPECT_LE(rep.lambda[static_cast<size_t>(m)], 2.0 * params.kappa + 1e-12) << "d=" << d;
  }
}

TEST(Constants, MonotonicityInvariants) {
  BuiltinParams params;
  params.c = 1.0;
  for (const char* name : {"wright-fisher", "logistic-drift", "migration", "mutation"}) {
    const ConstantsReport rep = compute_constants(builtin_system(name, params, 2));
    EXPECT_LE(rep.lambda[1], rep.lambda[2]);
    EXPECT_LE(rep.lambda[2], rep.lambda[3]);
    EXPECT_DOUBLE_EQ(rep.mu[0], 0.0);
    EXPECT_DOUBLE_EQ(rep.mu[1], 0.0);
    for (const auto& nu : rep.nu_per_coordinate) {
      EXPECT_LE(nu.nu[0], nu.nu[1]);
      EXPECT_LE(nu.nu[1], nu.nu[2]);
      EXPECT_LE(nu.nu[2], nu.nu_tilde3);
      EXPECT_LE(nu.nu_tilde3, nu.nu[3]);
    }
  }
}

TEST(Constants, MuIsMaxOverCoordinates) {
  CoefficientSystem sys;
  sys.dim = 2;
  sys.drift = {PolyExpr(2), PolyExpr(2)};
  sys.sqdiff = {parse_poly("x1*(1-x1)", 1), parse_poly("x1^2*(1-x1)^2", 1)};
  const ConstantsReport rep = compute_constants(sys);
  EXPECT_DOUBLE_EQ(rep.nu_per_coordinate[0].nu[2], 1.0);
  EXPECT_DOUBLE_EQ(rep.nu_per_coordinate[1].nu[2], 1.0);  // sup|2-12x+12x^2| = 2
  EXPECT_DOUBLE_EQ(rep.nu_per_coordinate[1].nu[3], 15.0); // 12 + 1.5*2
  EXPECT_DOUBLE_EQ(rep.mu[2], 1.0);
  EXPECT_DOUBLE_EQ(rep.mu[3], 15.0);
}

TEST(BoundFactor, WrightFisherFull) {
  const ConstantsReport rep = compute_constants(builtin_system("wright-fisher", {}, 1));
  EXPECT_NEAR(bound_factor(rep, 2, 1.0, BoundKind::Full), std::exp(1.0), 1e-12);
  EXPECT_DOUBLE_EQ(bound_factor(rep, 0, 7.0, BoundKind::Full), 1.0);
}

TEST(BoundFactor, DriftOnlyScales) {
  BuiltinParams params;
  params.kappa = 1.0;
  const ConstantsReport rep = compute_constants(builtin_system("migration", params, 1024));
  const double lam = rep.lambda[1];
  EXPECT_NEAR(lam, 2.0 * (1.0 - 1.0 / 1024.0), 1e-12);
  EXPECT_NEAR(bound_factor(rep, 1, 1.0, BoundKind::DriftOnly), std::exp(lam), 1e-12);
  EXPECT_NEAR(bound_factor(rep, 2, 0.5, BoundKind::DriftOnly), std::exp(4.0 * rep.lambda[2] * 0.5), 1e-12);
  EXPECT_NEAR(bound_factor(rep, 3, 0.25, BoundKind::DriftOnly), std::exp(13.0 * rep.lambda[3] * 0.25), 1e-12);
  EXPECT_DOUBLE_EQ(bound_factor(rep, 0, 3.0, BoundKind::DriftOnly), 1.0);
}

TEST(BoundFactor, SplitProductIndicator) {
  const ConstantsReport rep = compute_constants(builtin_system("mutation", {}, 1));
  // mutation(1, 0.5): lambda_m = 1 for all m, mu_2 = 1, mu_3 = 3
  EXPECT_NEAR(bound_factor(rep, 2, 1.0, BoundKind::SplitProduct), std::exp(4.0 + 1.0), 1e-12);
  EXPECT_NEAR(bound_factor(rep, 3, 1.0, BoundKind::SplitProduct), std::exp(13.0 + 3.0), 1e-12);
}

TEST(BoundFactor, MonotoneInTimeAndOrder) {
  BuiltinParams params;
  params.c = 1.0;
  const ConstantsReport rep = compute_constants(builtin_system("logistic-drift", params, 2));
  double prev_t = 0.0;
  for (double t : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    const double v = bound_factor(rep, 2, t, BoundKind::Full);
    EXPECT_GE(v, prev_t);
    prev_t = v;
  }
  for (double t : {0.25, 1.0}) {
    double prev_m = 0.0;
    for (int m = 0; m <= 3; ++m) {
      const double v = bound_factor(rep, m, t, BoundKind::Full);
      EXPECT_GE(v, prev_m);
      prev_m = v;
    }
  }
}

TEST(BoundFactor, RejectsBadOrder) {
  const ConstantsReport rep = compute_constants(builtin_system("wright-fisher", {}, 1));
  EXPECT_THROW(bound_factor(rep, 4, 1.0, BoundKind::Full), std::invalid_argument);
  EXPECT_THROW(bound_factor(rep, -1, 1.0, BoundKind::Full), std::invalid_argument);
}
