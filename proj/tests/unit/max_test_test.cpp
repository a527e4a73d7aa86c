#include "hdloc/distributions.hpp"
#include "hdloc/errors.hpp"
#include "hdloc/max_test.hpp"
#include "hdloc/stats_util.hpp"
#include "unit/support.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

namespace hdloc {
namespace {

using testing::normal_panel;
using testing::normal_sample;

double centering(double p) { return -2.0 * std::log(p) + std::log(std::log(p)); }

TEST(Gumbel, CdfAtMinusLogPi) {
  EXPECT_NEAR(gumbel_cdf(-std::log(std::numbers::pi)), 0.36787944117144233, 1e-15);
}

TEST(Gumbel, QuantileHighPrecisionValues) {
  // -log(pi) - 2 log(-log(1 - alpha)) evaluated with 30 significant digits.
  EXPECT_NEAR(gumbel_quantile(0.05), 4.79566061223492894, 1e-12);
  EXPECT_NEAR(gumbel_quantile(0.5), -0.41170404468607152, 1e-12);
  EXPECT_NEAR(gumbel_quantile(0.01), 8.05556856770375982, 1e-12);
}

TEST(Gumbel, Roundtrip) {
  for (double a : {0.001, 0.01, 0.05, 0.1, 0.5, 0.9}) {
    EXPECT_NEAR(gumbel_cdf(gumbel_quantile(a)), 1.0 - a, 1e-12);
    EXPECT_NEAR(gumbel_sf(gumbel_quantile(a)), a, 1e-12);
  }
}

TEST(Gumbel, StrictlyIncreasing) {
  double prev = gumbel_cdf(-5.0);
  for (int k = 1; k <= 1000; ++k) {
    const double v = gumbel_cdf(-5.0 + 0.05 * k);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_LT(gumbel_cdf(-5.0), 1e-2);
  EXPECT_EQ(gumbel_cdf(-40.0), 0.0);
  EXPECT_GT(gumbel_cdf(45.0), 1.0 - 1e-8);
}

TEST(Gumbel, QuantileRejectsBadAlpha) {
  EXPECT_THROW(gumbel_quantile(0.0), InvalidInput);
  EXPECT_THROW(gumbel_quantile(1.0), InvalidInput);
}

TEST(TMax, ZeroLocationGivesCentering) {
  const Sample x = normal_sample(10, 7, 3);
  HREstimate est;
  est.theta_hat = Vector::Zero(7);
  est.d_hat = Vector::Ones(7);
  EXPECT_EQ(t_max_statistic(x, WeightExponent::inverse_norm(), est), centering(7.0));
}

TEST(TMax, MatchesDirectEvaluation) {
  const Eigen::Index n = 10;
  const Eigen::Index p = 40;
  const Sample x = normal_sample(n, p, 21, 0.3);
  for (double m : {-1.0, 0.0, 0.5}) {
    const WeightExponent w(m);
    const HREstimate est = weighted_hr_estimate(x, w);
    double zeta_lo = 0.0;
    double zeta_2m = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r2 = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double e = (x.values()(i, j) - est.theta_hat[j]) / std::sqrt(est.d_hat[j]);
        r2 += e * e;
      }
      zeta_lo += std::pow(std::sqrt(r2), m - 1.0) / n;
      zeta_2m += std::pow(std::sqrt(r2), 2.0 * m) / n;
    }
    double mx = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) mx = std::max(mx, est.theta_hat[j] * est.theta_hat[j] / est.d_hat[j]);
    const double expected =
        n * mx * zeta_lo * zeta_lo / zeta_2m * p * (1.0 - 1.0 / std::sqrt(10.0)) + centering(40.0);
    EXPECT_NEAR(t_max_statistic(x, w, est), expected, 1e-12 * std::abs(expected)) << "m = " << m;
  }
}

TEST(TMax, SignExponentIsUnweightedConstruction) {
  const Sample x = normal_sample(30, 20, 22, 0.1);
  const HREstimate est = weighted_hr_estimate(x, WeightExponent::sign());
  const std::array<double, 1> k{-1.0};
  const double z = moment_estimates(x, est, k).at(-1.0);
  const double mx = (est.theta_hat.array().square() / est.d_hat.array()).maxCoeff();
  const double ss_max = 30.0 * mx * z * z * 20.0 * (1.0 - 1.0 / std::sqrt(30.0)) + centering(20.0);
  EXPECT_NEAR(t_max_statistic(x, WeightExponent::sign(), est), ss_max, 1e-10);
}

TEST(TMax, ColumnScaleInvariance) {
  const Panel x = normal_panel(40, 15, 23, 0.2);
  Panel scaled = x;
  scaled.col(0) *= 100.0;
  scaled.col(7) *= 0.01;
  for (double m : {-1.0, 0.0}) {
    const double a = t_max_statistic(Sample(x), WeightExponent(m));
    const double b = t_max_statistic(Sample(scaled), WeightExponent(m));
    EXPECT_NEAR(a, b, 1e-7) << "m = " << m;
  }
}

TEST(TMax, RequiresThreeColumns) {
  EXPECT_THROW(t_max_statistic(normal_sample(10, 2, 1), WeightExponent::sign()), InvalidInput);
  EXPECT_THROW(mean_max_statistic(normal_sample(10, 2, 1)), InvalidInput);
}

TEST(GumbelDecision, StatisticOnQuantileDoesNotReject) {
  const double q = gumbel_quantile(0.05);
  const TestResult r = gumbel_decision("IN-MAX", q, 0.05);
  EXPECT_FALSE(r.reject);
  EXPECT_GE(r.p_value, 0.05);
  const TestResult above = gumbel_decision("IN-MAX", std::nextafter(q, 100.0), 0.05);
  EXPECT_TRUE(above.reject);
  EXPECT_LT(above.p_value, 0.05);
}

TEST(GumbelDecision, RejectIffPValueBelowAlpha) {
  Rng rng(5);
  for (int k = 0; k < 2000; ++k) {
    const double t = -5.0 + 20.0 * rng.uniform();
    for (double a : {0.01, 0.05, 0.1}) {
      const TestResult r = gumbel_decision("X", t, a);
      EXPECT_EQ(r.reject, r.p_value < a);
      EXPECT_EQ(r.reject, t > gumbel_quantile(a));
      EXPECT_GE(r.p_value, 0.0);
      EXPECT_LE(r.p_value, 1.0);
    }
  }
}

TEST(MaxTest, Tags) {
  const Sample x = normal_sample(20, 10, 4);
  EXPECT_EQ(max_test(x, WeightExponent::inverse_norm(), 0.05).method, "IN-MAX");
  EXPECT_EQ(max_test(x, WeightExponent::sign(), 0.05).method, "SS-MAX");
  EXPECT_EQ(max_test(x, WeightExponent(0.5), 0.05).method, "W(0.5)-MAX");
  EXPECT_EQ(mean_max_test(x, 0.05).method, "MAX");
}

TEST(MaxTest, NonConvergenceBecomesWarning) {
  SolverOptions opts;
  opts.max_iter = 1;
  const TestResult r = max_test(normal_sample(20, 10, 4), WeightExponent::inverse_norm(), 0.05, opts);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(MeanMax, AntipodalPanelGivesCentering) {
  const Panel half = normal_panel(5, 6, 8);
  Panel x(10, 6);
  x << half, -half;
  EXPECT_NEAR(mean_max_statistic(Sample(x)), centering(6.0), 1e-12);
}

TEST(MeanMax, ZeroVarianceColumn) {
  Panel x = normal_panel(10, 4, 9);
  x.col(2).setConstant(1.0);
  EXPECT_THROW(mean_max_test(Sample(x), 0.05), DegenerateData);
}

TEST(MaxTest, NullPValuesNearUniform) {
  const Design design = design_for(Setting::I, 200);
  const Covariance cov = make_covariance(design.covariance);
  std::vector<double> pv;
  for (std::uint64_t r = 0; r < 500; ++r) {
    Rng rng(99, r, 0);
    const Sample x = sample_panel(design.law, cov, 80, {}, rng);
    pv.push_back(max_test(x, WeightExponent::inverse_norm(), 0.05).p_value);
  }
  EXPECT_LT(ks_distance_uniform(pv), 0.08);
}

TEST(PowerBand, NullBandWithinAlpha) {
  MaxPowerInputs in;
  in.theta1 = 0.0;
  in.n = 80;
  in.p = 2000;
  const std::array<double, 3> ks{-2.0, -1.0, 0.0};
  const MomentEstimates z = limit_radius_moments(RadialLaw::normal(), in.p, ks);
  for (const char* tag : {"IN-MAX", "SS-MAX", "MAX"}) {
    const PowerBand b = theoretical_power_max(in, z, tag);
    EXPECT_GE(b.lower, 0.0);
    EXPECT_LT(b.lower, 1e-3);
    EXPECT_LE(b.upper, 0.05 + 1e-3);
  }
}

TEST(PowerBand, NormalLawInverseNormMatchesMeanBased) {
  MaxPowerInputs in;
  in.theta1 = 0.4;
  in.n = 80;
  in.p = 200;
  const std::array<double, 3> ks{-2.0, -1.0, 0.0};
  const MomentEstimates z = limit_radius_moments(RadialLaw::normal(), in.p, ks);
  const PowerBand a = theoretical_power_max(in, z, "IN-MAX");
  const PowerBand b = theoretical_power_max(in, z, "MAX");
  EXPECT_NEAR(a.lower, b.lower, 1e-12);
  EXPECT_NEAR(a.upper, b.upper, 1e-12);
}

TEST(PowerBand, LowerEndpointIncreasesWithSignal) {
  MaxPowerInputs in;
  in.n = 80;
  in.p = 200;
  const std::array<double, 3> ks{-2.0, -1.0, 0.0};
  const MomentEstimates z = limit_radius_moments(RadialLaw::student_t(4.0), in.p, ks);
  double prev = -1.0;
  for (int k = 0; k <= 40; ++k) {
    in.theta1 = 0.025 * k;
    const double lo = theoretical_power_max(in, z, "IN-MAX").lower;
    EXPECT_GT(lo, prev);
    prev = lo;
  }
}

TEST(PowerBand, MissingMomentsAndBadTags) {
  MaxPowerInputs in;
  in.n = 80;
  in.p = 200;
  const MomentEstimates empty;
  EXPECT_THROW(theoretical_power_max(in, empty, "IN-MAX"), InvalidInput);
  EXPECT_THROW(theoretical_power_max(in, empty, "IN-SUM"), InvalidInput);
  EXPECT_NO_THROW(theoretical_power_max(in, empty, "MAX"));
}

TEST(PowerBand, SingleSpikeMonteCarloInsideBand) {
  // Sigma = I, theta = (theta1, 0, ..., 0), mean-based MAX.
  const Eigen::Index n = 80;
  const Eigen::Index p = 200;
  const double theta1 = 0.414;
  const Covariance cov = make_covariance(CovarianceSpec::identity(p));
  SignalSpec signal;
  signal.delta = theta1 * theta1;
  signal.s = 1;
  const int reps = 400;
  int rejections = 0;
  for (int r = 0; r < reps; ++r) {
    Rng rng(123, static_cast<std::uint64_t>(r), 0);
    rejections += mean_max_test(sample_panel(RadialLaw::normal(), cov, n, signal, rng), 0.05).reject ? 1 : 0;
  }
  const double power = static_cast<double>(rejections) / reps;
  MaxPowerInputs in;
  in.theta1 = theta1;
  in.n = n;
  in.p = p;
  const PowerBand band = theoretical_power_max(in, MomentEstimates{}, "MAX");
  const double se = std::sqrt(power * (1.0 - power) / reps);
  EXPECT_GE(power, band.lower - 3.0 * se);
  EXPECT_LE(power, band.upper + 3.0 * se);
}

}  // namespace
}  // namespace hdloc
