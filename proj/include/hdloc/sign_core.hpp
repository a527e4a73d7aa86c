#pragma once

#include "hdloc/sample.hpp"

#include <map>
#include <optional>
#include <span>
#include <utility>

namespace hdloc {

/// Spatial sign x / ||x||, with the zero vector mapped to itself.
Vector spatial_sign(const Eigen::Ref<const Vector>& x);

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  // Warm start. When absent the sample mean and sample variances are used.
  std::optional<Vector> init_theta;
  std::optional<Vector> init_d;
};

/// Location/diagonal-scale pair solving the weighted sign equations
///
///   n^{-1} sum_i w(||e_i||) U(e_i) = 0,   p diag{n^{-1} sum_i U(e_i) U(e_i)^T} = I,
///
/// with e_i = D^{-1/2}(X_i - theta). d_hat holds the diagonal of D (squared
/// scales). The residual fields are the sup-norms of the two equations at
/// (theta_hat, d_hat).
struct HREstimate {
  Vector theta_hat;
  Vector d_hat;
  int iterations = 0;
  double residual_location = 0.0;
  double residual_scale = 0.0;
  bool converged = false;
};

/// Fixed-point iteration for the weighted HR-type estimator:
///   (i)   e_i   <- D^{-1/2}(X_i - theta)
///   (ii)  theta <- theta + D^{1/2} sum_i w(r_i) U(e_i) / sum_i w(r_i) r_i^{-1}
///   (iii) D     <- p diag{n^{-1} sum_i U(e_i) U(e_i)^T} D
/// Stops once both residuals are <= tol. Hitting max_iter or the 1e-300
/// scale floor returns the last iterate with converged = false.
///
/// A zero residual with m < 0 shifts theta once by 1e-12 * sqrt(d_j); a
/// second occurrence throws DegenerateData.
HREstimate weighted_hr_estimate(const Sample& x, WeightExponent m, const SolverOptions& opts = {});

/// Estimate on the sample with rows i and j removed.
HREstimate leave_out_scale(const Sample& x, std::pair<Eigen::Index, Eigen::Index> excluded,
                           WeightExponent m, const SolverOptions& opts = {});

struct ScaleFit {
  Vector d_hat;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Diagonal scale with the location held at the origin: solves
/// p n^{-1} sum_i U(D^{-1/2} X_i)_j^2 = 1 for every j. The fit is even in
/// each row, so flipping the sign of any observation leaves it unchanged.
ScaleFit null_scale_estimate(const Sample& x, const SolverOptions& opts = {});

struct HRResiduals {
  double location = 0.0;
  double scale = 0.0;
};

/// Sup-norm residuals of the two estimating equations at (theta, d).
/// Throws DegenerateData for a zero residual with m < 0, or when every
/// residual is zero.
HRResiduals hr_residuals(const Sample& x, const Vector& theta, const Vector& d, WeightExponent m);

/// Plug-in radial moments zeta_k = n^{-1} sum_i ||D^{-1/2}(X_i - theta)||^k.
class MomentEstimates {
 public:
  MomentEstimates() = default;

  void set(double k, double value);
  bool contains(double k) const { return values_.count(k) != 0; }
  // Throws InvalidInput when k was not computed.
  double at(double k) const;
  const std::map<double, double>& values() const { return values_; }

 private:
  std::map<double, double> values_;
};

MomentEstimates moment_estimates(const Sample& x, const HREstimate& est,
                                 std::span<const double> exponents);

/// Radii ||D^{-1/2}(X_i - theta)||.
Vector standardized_radii(const Panel& x, const Vector& theta, const Vector& d);

}  // namespace hdloc
