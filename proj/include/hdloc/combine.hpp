#pragma once

#include "hdloc/distributions.hpp"
#include "hdloc/result.hpp"
#include "hdloc/sample.hpp"
#include "hdloc/sum_test.hpp"

#include <array>
#include <cstdint>
#include <span>

namespace hdloc {

// Inputs outside [1e-15, 1 - 1e-15] are clipped before the tangent transform.
inline constexpr double kCauchyClip = 1e-15;

struct CauchyOutcome {
  double p_value = 0.0;
  bool clipped = false;
};

// p = 1 - G(sum_i w_i tan((0.5 - p_i) pi)), G the standard Cauchy CDF.
// Weights default to equal and must sum to one.
CauchyOutcome cauchy_combine_detailed(std::span<const double> p_values,
                                      std::span<const double> weights = {});
double cauchy_combine(std::span<const double> p_values, std::span<const double> weights = {});

struct CombinedResult {
  double p_max = 1.0;
  double p_sum = 1.0;
  double p_cc = 1.0;
  std::array<TestResult, 2> component_results;  // max side, sum side
  TestResult combined;
};

// Equal-weight combination of two component results into a tagged envelope.
CombinedResult combine_results(const TestResult& max_side, const TestResult& sum_side,
                               std::string method, double alpha);

// Weighted max and sum tests on the same sample, combined.
CombinedResult cc_test(const Sample& x, WeightExponent m, double alpha, const SumOptions& opts = {});
// Same with a precomputed HR estimate for the max side.
CombinedResult cc_test(const Sample& x, WeightExponent m, const HREstimate& max_estimate, double alpha,
                       const SumOptions& opts = {});

// Mean-based MAX and SUM combined (tag CC).
CombinedResult mean_cc_test(const Sample& x, double alpha);

struct IndependenceReport {
  std::int64_t reps = 0;
  std::int64_t errors = 0;
  double correlation = 0.0;       // corr(T_MAX, T_SUM / sigma_hat)
  double ks_p_cc = 0.0;           // KS distance of p_cc from U(0, 1)
};

// Simulated panels from `setting` with the given signal; shared-scale sum side.
IndependenceReport joint_independence_diagnostic(Setting setting, Eigen::Index n, Eigen::Index p,
                                                 WeightExponent m, std::int64_t reps,
                                                 std::uint64_t seed, const SignalSpec& signal = {},
                                                 unsigned workers = 1);
IndependenceReport joint_independence_diagnostic(const Design& design, Eigen::Index n, WeightExponent m,
                                                 std::int64_t reps, std::uint64_t seed,
                                                 const SignalSpec& signal = {}, unsigned workers = 1);

}  // namespace hdloc
