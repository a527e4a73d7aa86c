#include "hdloc/max_test.hpp"

#include "hdloc/errors.hpp"
#include "hdloc/stats_util.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace hdloc {

namespace {

void require_log_log_dimension(Eigen::Index p) {
  if (p < 3) {
    throw InvalidInput("max-type statistics need p >= 3 (log log p <= 0), got p = " +
                       std::to_string(p));
  }
}

double gumbel_centering(Eigen::Index p) {
  const double lp = std::log(static_cast<double>(p));
  return -2.0 * lp + std::log(lp);
}

void check_power_inputs(const MaxPowerInputs& in) {
  check_alpha(in.alpha);
  require_log_log_dimension(in.p);
  if (in.n < 1) throw InvalidInput("power calculation needs n >= 1");
  if (!(in.theta1 >= 0.0)) throw InvalidInput("theta1 must be >= 0");
  if (!(in.d1 > 0.0) || !(in.varsigma1 > 0.0)) throw InvalidInput("scales must be positive");
}

PowerBand band_from_shift(const MaxPowerInputs& in, double shift) {
  const double lp = std::log(static_cast<double>(in.p));
  const double x_alpha = 2.0 * lp - std::log(lp) + gumbel_quantile(in.alpha);
  PowerBand band;
  band.lower = normal_cdf(-std::sqrt(x_alpha) + shift);
  band.upper = std::min(1.0, band.lower + in.alpha);
  return band;
}

}  // namespace

double gumbel_cdf(double x) {
  return std::exp(-std::exp(-0.5 * x) / std::sqrt(std::numbers::pi));
}

double gumbel_sf(double x) {
  return -std::expm1(-std::exp(-0.5 * x) / std::sqrt(std::numbers::pi));
}

double gumbel_quantile(double alpha) {
  check_alpha(alpha);
  return -std::log(std::numbers::pi) - 2.0 * std::log(-std::log1p(-alpha));
}

double t_max_statistic(const Sample& x, WeightExponent m, const HREstimate& est) {
  require_log_log_dimension(x.p());
  const double m_value = m.value();
  const std::array<double, 2> exponents{m_value - 1.0, 2.0 * m_value};
  const MomentEstimates zeta = moment_estimates(x, est, exponents);
  const double zeta_lo = zeta.at(m_value - 1.0);
  const double zeta_2m = zeta.at(2.0 * m_value);

  const double max_sq = (est.theta_hat.array().square() / est.d_hat.array()).maxCoeff();
  const double n = static_cast<double>(x.n());
  const double p = static_cast<double>(x.p());
  return n * max_sq * zeta_lo * zeta_lo / zeta_2m * p * (1.0 - 1.0 / std::sqrt(n)) +
         gumbel_centering(x.p());
}

double t_max_statistic(const Sample& x, WeightExponent m, const SolverOptions& opts) {
  require_log_log_dimension(x.p());
  return t_max_statistic(x, m, weighted_hr_estimate(x, m, opts));
}

TestResult gumbel_decision(std::string method, double statistic, double alpha) {
  check_alpha(alpha);
  TestResult out;
  out.method = std::move(method);
  out.statistic = statistic;
  out.alpha = alpha;
  out.reject = statistic > gumbel_quantile(alpha);
  out.p_value = gumbel_sf(statistic);
  // Rounding can put the p-value on the wrong side of alpha when the
  // statistic sits on the quantile; the strict quantile rule wins.
  if (out.reject && !(out.p_value < alpha)) out.p_value = std::nextafter(alpha, 0.0);
  if (!out.reject && out.p_value < alpha) out.p_value = alpha;
  return out;
}

TestResult max_test(const Sample& x, WeightExponent m, const HREstimate& est, double alpha) {
  check_alpha(alpha);
  TestResult out = gumbel_decision(weighted_tag(m.value(), "MAX"), t_max_statistic(x, m, est), alpha);
  if (!est.converged) {
    out.warnings.push_back("location/scale solver did not converge after " +
                           std::to_string(est.iterations) + " iterations");
  }
  return out;
}

TestResult max_test(const Sample& x, WeightExponent m, double alpha, const SolverOptions& opts) {
  check_alpha(alpha);
  require_log_log_dimension(x.p());
  return max_test(x, m, weighted_hr_estimate(x, m, opts), alpha);
}

double mean_max_statistic(const Sample& x) {
  x.require_testable();
  require_log_log_dimension(x.p());
  const Panel& data = x.values();
  const double n = static_cast<double>(x.n());
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::RowVectorXd var = (data.rowwise() - mean).colwise().squaredNorm() / (n - 1.0);
  if ((var.array() <= 0.0).any()) throw DegenerateData("zero sample variance in some column");
  const double max_sq = (mean.array().square() / var.array()).maxCoeff();
  return n * max_sq + gumbel_centering(x.p());
}

TestResult mean_max_test(const Sample& x, double alpha) {
  check_alpha(alpha);
  return gumbel_decision("MAX", mean_max_statistic(x), alpha);
}

PowerBand theoretical_power_max(const MaxPowerInputs& in, const MomentEstimates& zeta,
                                WeightExponent m) {
  check_power_inputs(in);
  const double z_lo = zeta.at(m.value() - 1.0);
  const double z_2m = zeta.at(2.0 * m.value());
  const double shift = std::sqrt(static_cast<double>(in.n) * static_cast<double>(in.p)) *
                       in.theta1 / in.d1 * z_lo / std::sqrt(z_2m);
  return band_from_shift(in, shift);
}

PowerBand theoretical_power_max(const MaxPowerInputs& in, const MomentEstimates& zeta,
                                std::string_view method) {
  if (method == "IN-MAX") return theoretical_power_max(in, zeta, WeightExponent::inverse_norm());
  if (method == "SS-MAX") return theoretical_power_max(in, zeta, WeightExponent::sign());
  if (method == "MAX") {
    check_power_inputs(in);
    return band_from_shift(in, std::sqrt(static_cast<double>(in.n)) * in.theta1 / in.varsigma1);
  }
  throw InvalidInput("unknown max-type method tag: " + std::string(method));
}

}  // namespace hdloc
