#include "hdloc/are.hpp"
#include "hdloc/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace hdloc {
namespace {

TEST(Are, SelfComparisonIsOne) {
  for (const RadialLaw& law : reference_laws()) {
    EXPECT_NEAR(are_weighted_pair(law, WeightExponent::inverse_norm()), 1.0, 1e-14) << law.label();
  }
}

TEST(Are, NormalLawIsOneEverywhere) {
  const AreTriple a = are_closed_form(RadialLaw::normal());
  EXPECT_EQ(a.in_vs_max, 1.0);
  EXPECT_EQ(a.in_vs_ss, 1.0);
  EXPECT_EQ(a.ss_vs_max, 1.0);
}

TEST(Are, WeightOneIsMeanBased) {
  // m = 1 leaves E(v^0)^2 in the denominator: E v^-2 E v^2.
  EXPECT_NEAR(are_weighted_pair(RadialLaw::student_t(3), WeightExponent(1.0)), 3.0, 1e-12);
}

TEST(Are, StudentValues) {
  // Gamma-function values computed at 30 digits.
  const AreTriple t3 = are_closed_form(RadialLaw::student_t(3));
  EXPECT_NEAR(t3.in_vs_max, 3.0, 1e-12);
  EXPECT_NEAR(t3.in_vs_ss, 1.17809724509617239, 1e-12);
  EXPECT_NEAR(t3.ss_vs_max, 2.54647908947032538, 1e-12);
  const AreTriple t4 = are_closed_form(RadialLaw::student_t(4));
  EXPECT_NEAR(t4.in_vs_max, 2.0, 1e-12);
  EXPECT_NEAR(t4.in_vs_ss, 1.13176848420903334, 1e-12);
  EXPECT_NEAR(t4.ss_vs_max, 1.76714586764425894, 1e-12);
}

TEST(Are, MixtureValues) {
  const AreTriple a = are_closed_form(RadialLaw::mixture(0.2, 10));
  EXPECT_NEAR(a.in_vs_max, 0.802 * 20.8, 1e-12);
  EXPECT_NEAR(a.in_vs_ss, 0.802 / (0.82 * 0.82), 1e-12);
  const AreTriple b = are_closed_form(RadialLaw::mixture(0.5, 10));
  EXPECT_NEAR(b.in_vs_max, 0.505 * 50.5, 1e-12);
}

TEST(Are, ReferenceTableAgreementAndFlag) {
  const std::vector<AREReport> reports = are_table(reference_laws());
  ASSERT_EQ(reports.size(), 8u);
  for (const AREReport& r : reports) {
    ASSERT_TRUE(r.reference.has_value()) << r.law.label();
    const bool is_mn_02_3 = r.law.kind == RadialLaw::Kind::Mixture && r.law.gamma == 0.2 && r.law.sigma == 3.0;
    if (is_mn_02_3) {
      // E v^-2 E v^2 = (0.8 + 0.2 / 9)(0.8 + 0.2 * 9) = 2.1378 against a tabulated 2.25.
      EXPECT_NEAR(r.value.in_vs_max, 2.137777777777778, 1e-12);
      EXPECT_TRUE(r.discrepancy_in_vs_max);
    } else {
      EXPECT_FALSE(r.discrepancy_in_vs_max) << r.law.label();
      EXPECT_FALSE(r.discrepancy_in_vs_ss) << r.law.label();
    }
  }
}

TEST(Are, ChainIdentityAndHolder) {
  for (const RadialLaw& law : reference_laws()) {
    const AreTriple a = are_closed_form(law);
    EXPECT_NEAR(a.in_vs_max, a.in_vs_ss * a.ss_vs_max, 1e-9 * a.in_vs_max) << law.label();
    EXPECT_GE(a.in_vs_max, 1.0 - 1e-12);
    EXPECT_GE(a.in_vs_ss, 1.0 - 1e-12);
    EXPECT_GE(a.ss_vs_max, 1.0 - 1e-12);
  }
}

TEST(Are, MonteCarloMatchesClosedForm) {
  for (const RadialLaw& law : {RadialLaw::student_t(5), RadialLaw::mixture(0.2, 10)}) {
    const AREReport mc = are_monte_carlo(law, 400000, 3);
    ASSERT_TRUE(mc.mc_stderr.has_value());
    const AreTriple exact = are_closed_form(law);
    EXPECT_LT(std::abs(mc.value.in_vs_max - exact.in_vs_max), 4.0 * mc.mc_stderr->in_vs_max);
    EXPECT_LT(std::abs(mc.value.in_vs_ss - exact.in_vs_ss), 4.0 * mc.mc_stderr->in_vs_ss);
    EXPECT_LT(std::abs(mc.value.ss_vs_max - exact.ss_vs_max), 4.0 * mc.mc_stderr->ss_vs_max);
  }
}

TEST(Are, FinitePConverges) {
  const RadialLaw law = RadialLaw::student_t(6);
  const double limit = are_closed_form(law).in_vs_max;
  const MonteCarloEstimate small = finite_p_are_in_vs_max(law, 10, 40000, 5);
  const MonteCarloEstimate large = finite_p_are_in_vs_max(law, 1000, 40000, 5);
  EXPECT_LT(std::abs(large.value - limit), std::abs(small.value - limit));
  EXPECT_LT(std::abs(large.value - limit), 0.05);
}

TEST(Are, UnknownLawHasNoReference) {
  EXPECT_FALSE(reference_are(RadialLaw::student_t(7)).has_value());
}

TEST(Are, OutputsMentionEveryLaw) {
  const std::vector<AREReport> reports = are_table(reference_laws());
  std::ostringstream csv, text;
  write_are_csv(csv, reports);
  write_are_text(text, reports);
  for (const RadialLaw& law : reference_laws()) {
    EXPECT_NE(csv.str().find(law.label()), std::string::npos);
    EXPECT_NE(text.str().find(law.label()), std::string::npos);
  }
  EXPECT_EQ(csv.str().rfind("law,mode,comparison,value,stderr,reference,discrepancy", 0), 0u);
}

TEST(Are, MonteCarloNeedsDraws) {
  EXPECT_THROW(are_monte_carlo(RadialLaw::normal(), 1, 1), InvalidInput);
}

}  // namespace
}  // namespace hdloc
