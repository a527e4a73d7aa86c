#include "hdloc/combine.hpp"

#include "hdloc/errors.hpp"
#include "hdloc/max_test.hpp"
#include "hdloc/parallel.hpp"
#include "hdloc/stats_util.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace hdloc {

CauchyOutcome cauchy_combine_detailed(std::span<const double> p_values,
                                      std::span<const double> weights) {
  if (p_values.empty()) throw InvalidInput("cauchy_combine needs at least one p-value");
  if (!weights.empty()) {
    if (weights.size() != p_values.size()) throw InvalidInput("weights and p-values differ in length");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw InvalidInput("weights must be non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("weights must sum to 1");
  }

  CauchyOutcome out;
  std::vector<double> clipped(p_values.size());
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    const double p = p_values[i];
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("p-values must lie in [0, 1]");
    clipped[i] = std::clamp(p, kCauchyClip, 1.0 - kCauchyClip);
    out.clipped = out.clipped || clipped[i] != p;
  }

  // Equal inputs are a fixed point of the transform.
  if (std::all_of(clipped.begin(), clipped.end(), [&](double p) { return p == clipped.front(); })) {
    out.p_value = clipped.front();
    return out;
  }

  const double equal = 1.0 / static_cast<double>(clipped.size());
  double t = 0.0;
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    const double w = weights.empty() ? equal : weights[i];
    t += w * std::tan((0.5 - clipped[i]) * std::numbers::pi);
  }
  // 1 - G(t) = 1/2 - atan(t)/pi, written as atan(1/t)/pi for t > 0 to keep
  // small p-values accurate.
  out.p_value = t > 0.0 ? std::atan(1.0 / t) / std::numbers::pi : 0.5 - std::atan(t) / std::numbers::pi;
  return out;
}

double cauchy_combine(std::span<const double> p_values, std::span<const double> weights) {
  return cauchy_combine_detailed(p_values, weights).p_value;
}

CombinedResult combine_results(const TestResult& max_side, const TestResult& sum_side,
                               std::string method, double alpha) {
  check_alpha(alpha);
  CombinedResult out;
  out.p_max = max_side.p_value;
  out.p_sum = sum_side.p_value;
  const std::array<double, 2> ps{out.p_max, out.p_sum};
  const CauchyOutcome cc = cauchy_combine_detailed(ps);
  out.p_cc = cc.p_value;
  out.component_results = {max_side, sum_side};

  out.combined.method = std::move(method);
  out.combined.alpha = alpha;
  out.combined.p_value = out.p_cc;
  out.combined.statistic = std::tan((0.5 - out.p_cc) * std::numbers::pi);
  out.combined.reject = out.p_cc < alpha;
  for (const TestResult* side : {&max_side, &sum_side}) {
    for (const auto& w : side->warnings) out.combined.warnings.push_back(side->method + ": " + w);
  }
  if (cc.clipped) out.combined.warnings.push_back("component p-value clipped to [1e-15, 1-1e-15]");
  return out;
}

CombinedResult cc_test(const Sample& x, WeightExponent m, const HREstimate& max_estimate, double alpha,
                       const SumOptions& opts) {
  check_alpha(alpha);
  const TestResult max_side = max_test(x, m, max_estimate, alpha);
  const TestResult sum_side = sum_test(x, m, alpha, opts);
  return combine_results(max_side, sum_side, weighted_tag(m.value(), "CC"), alpha);
}

CombinedResult cc_test(const Sample& x, WeightExponent m, double alpha, const SumOptions& opts) {
  check_alpha(alpha);
  x.require_testable();
  return cc_test(x, m, weighted_hr_estimate(x, m, opts.solver), alpha, opts);
}

CombinedResult mean_cc_test(const Sample& x, double alpha) {
  return combine_results(mean_max_test(x, alpha), mean_sum_test(x, alpha), "CC", alpha);
}

IndependenceReport joint_independence_diagnostic(Setting setting, Eigen::Index n, Eigen::Index p,
                                                 WeightExponent m, std::int64_t reps,
                                                 std::uint64_t seed, const SignalSpec& signal,
                                                 unsigned workers) {
  return joint_independence_diagnostic(design_for(setting, p), n, m, reps, seed, signal, workers);
}

IndependenceReport joint_independence_diagnostic(const Design& design, Eigen::Index n, WeightExponent m,
                                                 std::int64_t reps, std::uint64_t seed,
                                                 const SignalSpec& signal, unsigned workers) {
  if (reps < 200) throw InvalidInput("independence diagnostic needs reps >= 200");
  const Covariance cov = make_covariance(design.covariance);
  const Eigen::Index p = cov.sigma.rows();
  signal.validate(p);

  struct Draw {
    std::optional<std::array<double, 3>> values;  // T_MAX, T_SUM / sigma, p_cc
  };
  std::vector<Draw> draws(static_cast<std::size_t>(reps));
  parallel_for(draws.size(), workers, [&](std::size_t r) {
    try {
      Rng rng(seed, r, 0);
      const Sample x = sample_panel(design.law, cov, n, signal, rng);
      const HREstimate est = weighted_hr_estimate(x, m);
      const double t_max = t_max_statistic(x, m, est);
      const SumComponents parts = sum_components_shared(x, m, null_scale_estimate(x).d_hat);
      const double z_sum = parts.t_sum / std::sqrt(parts.variance.sigma_sq_hat);
      const std::array<double, 2> ps{gumbel_sf(t_max), normal_sf(z_sum)};
      draws[r].values = std::array<double, 3>{t_max, z_sum, cauchy_combine(ps)};
    } catch (const Error&) {
      draws[r].values.reset();
    }
  });

  IndependenceReport out;
  std::vector<double> t_max, z_sum, p_cc;
  for (const Draw& d : draws) {
    if (!d.values) {
      ++out.errors;
      continue;
    }
    t_max.push_back((*d.values)[0]);
    z_sum.push_back((*d.values)[1]);
    p_cc.push_back((*d.values)[2]);
  }
  out.reps = static_cast<std::int64_t>(t_max.size());
  if (out.reps < 2) throw NumericalFailure("independence diagnostic: too many failed replications");
  out.correlation = correlation(t_max, z_sum);
  out.ks_p_cc = ks_distance_uniform(p_cc);
  return out;
}

}  // namespace hdloc
