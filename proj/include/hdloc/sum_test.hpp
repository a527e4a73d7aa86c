#pragma once

#include "hdloc/result.hpp"
#include "hdloc/sample.hpp"
#include "hdloc/sign_core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hdloc {

// How the diagonal scale entering each pair term of the U-statistic is
// obtained.
//   ExactLeaveTwoOut: D~_ij re-estimated without rows i and j (m = 0 system).
//   SharedScale:      one full-sample scale for every pair, fitted with the
//                     location held at the null value (null_scale_estimate).
enum class ScaleMode { ExactLeaveTwoOut, SharedScale };

std::string to_string(ScaleMode mode);
ScaleMode parse_scale_mode(const std::string& text);

struct SumOptions {
  ScaleMode mode = ScaleMode::ExactLeaveTwoOut;
  SolverOptions solver;
  unsigned workers = 1;  // pair terms in exact mode
};

struct SumVarianceEstimate {
  double sigma_sq_hat = 0.0;
  std::int64_t pair_count = 0;  // ordered pairs (i, j), i != j
};

struct SumComponents {
  double t_sum = 0.0;
  SumVarianceEstimate variance;
  ScaleMode mode = ScaleMode::ExactLeaveTwoOut;
  std::int64_t nonconverged_pairs = 0;
  std::vector<std::string> warnings;
};

// T_SUM^(m) and sigma^2_n computed together; they share every pair scale.
//
// T_SUM = 2/(n(n-1)) sum_{i<j} r_i^m r_j^m U_i^T U_j, with r_k, U_k the norm and
// sign of D~_ij^{-1/2} X_k. The variance estimate is
//   2 n^{-4} sum_{i != j} r_i^{2m} r_j^{2m} {(U_i - mu_ij)^T U_j}{(U_j - mu_ij)^T U_i},
// where mu_ij = (n-2)^{-1} sum_{k != i,j} r_k^m U_k is the leave-two-out mean
// weighted sign. A non-positive variance estimate throws DegenerateData.
SumComponents sum_components(const Sample& x, WeightExponent m, const SumOptions& opts = {});

// Shared-scale computation with a caller-supplied diagonal scale d (n >= 3).
SumComponents sum_components_shared(const Sample& x, WeightExponent m, const Vector& d);

// T_SUM alone with a fixed diagonal scale; valid for any n >= 2.
double t_sum_with_scale(const Sample& x, WeightExponent m, const Vector& d);

double t_sum_statistic(const Sample& x, WeightExponent m, const SumOptions& opts = {});
SumVarianceEstimate sigma_hat_sq(const Sample& x, WeightExponent m, const SumOptions& opts = {});

// One-sided normal calibration of T_SUM / sigma_hat; statistic is the
// studentized value.
TestResult sum_test(const Sample& x, WeightExponent m, double alpha, const SumOptions& opts = {});
TestResult sum_test(const SumComponents& parts, WeightExponent m, double alpha);

// sigma_n^2 = 2 n^{-2} p^{-2} zeta_{2m}^2 tr(R^2).
double population_sum_variance(Eigen::Index n, Eigen::Index p, double zeta_2m, double trace_r_sq);

// Phi(-z_alpha + zeta_{m-1}^2 p n theta^T D^{-1} theta / (zeta_{2m} sqrt(2 tr(R^2)))).
// d holds the diagonal of D.
double theoretical_power_sum(const Vector& theta, const Vector& d, double trace_r_sq, Eigen::Index n,
                             WeightExponent m, const MomentEstimates& zeta, double alpha);

// Scalar-invariant mean-based statistic (studentized):
//   [n xbar^T D_s^{-1} xbar - (n-1)p/(n-3)] / sqrt(2 [tr(R^2) - p^2/(n-1)] c),
//   c = 1 + tr(R^2) / p^{3/2},
// with D_s the diagonal of the sample covariance and R the sample correlation
// matrix.
double mean_sum_statistic(const Sample& x);
TestResult mean_sum_test(const Sample& x, double alpha);

}  // namespace hdloc
