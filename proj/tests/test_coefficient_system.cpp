#include "sgcert/coefficient_system.hpp"

#include <gtest/gtest.h>

using namespace sgcert;

TEST(Builtins, WrightFisher) {
  const CoefficientSystem sys = builtin_system("wright-fisher", {}, 3);
  EXPECT_EQ(sys.dim, 3);
  EXPECT_TRUE(sys.drift_is_zero());
  for (const auto& a : sys.sqdiff) {
    EXPECT_DOUBLE_EQ(a.eval(std::vector<double>{0.5}), 0.25);
    EXPECT_DOUBLE_EQ(a.eval(std::vector<double>{0.0}), 0.0);
    EXPECT_DOUBLE_EQ(a.eval(std::vector<double>{1.0}), 0.0);
  }
}

TEST(Builtins, MutationDrift) {
  BuiltinParams params;
  params.kappa = 1.0;
  params.mbar = 0.5;
  const CoefficientSystem sys = builtin_system("mutation", params, 1);
  // b(x) = 0.5 - x
  EXPECT_DOUBLE_EQ(sys.drift[0].eval(std::vector<double>{0.2}), 0.3);
  EXPECT_DOUBLE_EQ(sys.drift[0].eval(std::vector<double>{0.5}), 0.0);
}

TEST(Builtins, MigrationDrift) {
  BuiltinParams params;
  params.kappa = 2.0;
  const CoefficientSystem sys = builtin_system("migration", params, 4);
  // b_i = 2(xbar - x_i)
  const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
  const double xbar = 0.25;
  for (int i = 0; i < 4; ++i)
    EXPECT_NEAR(sys.drift[static_cast<size_t>(i)].eval(x), 2.0 * (xbar - x[static_cast<size_t>(i)]), 1e-15);
}

TEST(Builtins, UnknownFamilyAndBadParams) {
  EXPECT_THROW(builtin_system("heston", {}, 1), std::invalid_argument);
  BuiltinParams params;
  params.mbar = 1.5;
  EXPECT_THROW(builtin_system("mutation", params, 1), std::invalid_argument);
}

TEST(Validate, ContractionDriftAdmissible) {
  // d=1, b = -x, a = x(1-x): at x=0 b=0 >= 0; at x=1, -b(1) = 1 >= 0
  CoefficientSystem sys;
  sys.dim = 1;
  sys.drift = {parse_poly("0 - x1", 1)};
  sys.sqdiff = {parse_poly("x1*(1-x1)", 1)};
  const ValidationReport rep = validate(sys);
  EXPECT_TRUE(rep.admissible()) << rep.violations.size();
}

TEST(Validate, OutwardDriftRejectedWithWitness) {
  CoefficientSystem sys;
  sys.dim = 1;
  sys.drift = {parse_poly("x1", 1)};
  sys.sqdiff = {parse_poly("x1*(1-x1)", 1)};
  const ValidationReport rep = validate(sys);
  EXPECT_FALSE(rep.admissible());
  ASSERT_FALSE(rep.violations.empty());
  const Violation& v = rep.violations.front();
  EXPECT_EQ(v.coordinate, 1);
  ASSERT_EQ(v.witness.size(), 1u);
  EXPECT_DOUBLE_EQ(v.witness[0], 1.0);  // face x=1, where -b(1) = -1 < 0
  EXPECT_DOUBLE_EQ(v.value, -1.0);
}

TEST(Validate, MigrationAdmissible) {
  BuiltinParams params;
  params.kappa = 1.0;
  const ValidationReport rep = validate(builtin_system("migration", params, 2));
  EXPECT_TRUE(rep.admissible());
}

TEST(Validate, AllBuiltinFamiliesAdmissible) {
  const std::vector<std::string> names{"wright-fisher", "logistic-drift", "migration",
                                       "mutation",      "zero-drift",     "zero-diffusion"};
  for (const auto& name : names)
    for (int d : {1, 2, 4}) {
      const ValidationReport rep = validate(builtin_system(name, {}, d));
      EXPECT_TRUE(rep.admissible()) << name << " d=" << d;
    }
}

TEST(Validate, InteriorPositivityViolation) {
  CoefficientSystem sys;
  sys.dim = 1;
  sys.drift = {PolyExpr(1)};
  // vanishes at 0, 1 and at 1/2; negative in between
  sys.sqdiff = {parse_poly("x1*(1-x1)*(x1-0.5)^2 - 0.01*x1*(1-x1)", 1)};
  const ValidationReport rep = validate(sys);
  EXPECT_FALSE(rep.diffusion_admissible);
}

TEST(Validate, NonvanishingEndpointViolation) {
  CoefficientSystem sys;
  sys.dim = 1;
  sys.drift = {PolyExpr(1)};
  sys.sqdiff = {parse_poly("x1*(1-x1) + 0.125", 1)};
  const ValidationReport rep = validate(sys);
  EXPECT_FALSE(rep.diffusion_admissible);
}

TEST(Validate, HighDimensionalFaceSampling) {
  BuiltinParams params;
  params.kappa = 1.0;
  const CoefficientSystem sys = builtin_system("migration", params, 40);
  const ValidationReport rep = validate(sys);
  EXPECT_TRUE(rep.admissible());
}
