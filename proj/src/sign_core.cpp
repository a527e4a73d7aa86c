#include "hdloc/sign_core.hpp"

#include "hdloc/errors.hpp"

#include <cmath>
#include <string>

namespace hdloc {

namespace {

constexpr double kScaleFloor = 1e-300;
constexpr double kJitter = 1e-12;

// Sums shared by the update step and the residuals.
struct EquationTerms {
  Vector weighted_sign_sum;  // sum_i w(r_i) U(e_i)
  double step_denominator = 0.0;  // sum_i w(r_i) / r_i
  Vector sign_square_mean;  // n^{-1} sum_i U(e_i)_j^2
  Eigen::Index zero_radii = 0;
};

EquationTerms evaluate(const Panel& x, const Vector& theta, const Vector& d, WeightExponent m) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const Eigen::RowVectorXd inv_scale = d.cwiseSqrt().cwiseInverse().transpose();
  const Eigen::RowVectorXd center = theta.transpose();

  EquationTerms terms;
  terms.weighted_sign_sum = Vector::Zero(p);
  terms.sign_square_mean = Vector::Zero(p);
  Eigen::RowVectorXd e(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    e = (x.row(i) - center).cwiseProduct(inv_scale);
    const double r2 = e.squaredNorm();
    if (r2 == 0.0) {
      ++terms.zero_radii;
      continue;
    }
    const double r = std::sqrt(r2);
    const double c = m.weight(r) / r;
    terms.weighted_sign_sum += c * e.transpose();
    terms.step_denominator += c;
    terms.sign_square_mean += (e.array().square() / r2).matrix().transpose();
  }
  terms.sign_square_mean /= static_cast<double>(n);
  return terms;
}

HRResiduals residuals_from(const EquationTerms& terms, Eigen::Index n, Eigen::Index p) {
  HRResiduals res;
  res.location = (terms.weighted_sign_sum / static_cast<double>(n)).cwiseAbs().maxCoeff();
  res.scale = (static_cast<double>(p) * terms.sign_square_mean.array() - 1.0).abs().maxCoeff();
  return res;
}

void check_scales(const Vector& d, Eigen::Index p) {
  if (d.size() != p) throw InvalidInput("scale vector has wrong length");
  if (!d.allFinite() || (d.array() <= 0.0).any()) {
    throw InvalidInput("scale entries must be finite and strictly positive");
  }
}

}  // namespace

Vector spatial_sign(const Eigen::Ref<const Vector>& x) {
  if (!x.allFinite()) throw InvalidInput("spatial_sign: non-finite input");
  const double norm = x.norm();
  if (norm == 0.0) return Vector::Zero(x.size());
  return x / norm;
}

HREstimate weighted_hr_estimate(const Sample& x, WeightExponent m, const SolverOptions& opts) {
  x.require_testable();
  if (!(opts.tol > 0.0)) throw InvalidInput("solver tolerance must be positive");
  if (opts.max_iter < 1) throw InvalidInput("solver max_iter must be >= 1");

  const Panel& data = x.values();
  const Eigen::Index n = x.n();
  const Eigen::Index p = x.p();

  Vector theta;
  Vector d;
  if (opts.init_theta) {
    theta = *opts.init_theta;
    if (theta.size() != p || !theta.allFinite()) throw InvalidInput("invalid initial location");
  } else {
    theta = data.colwise().mean().transpose();
  }
  if (opts.init_d) {
    d = *opts.init_d;
    check_scales(d, p);
  } else {
    const Vector mean = data.colwise().mean().transpose();
    d = (data.rowwise() - mean.transpose()).colwise().squaredNorm().transpose() /
        static_cast<double>(n - 1);
    if ((d.array() <= 0.0).any()) {
      throw InvalidInput("non-positive sample variance in initialization (constant column)");
    }
  }

  HREstimate est;
  bool jittered = false;
  bool hit_floor = false;
  for (int iter = 0;; ++iter) {
    EquationTerms terms = evaluate(data, theta, d, m);
    if (terms.zero_radii > 0 && m.value() < 0.0) {
      if (jittered) {
        throw DegenerateData("zero standardized residual recurred with negative weight exponent");
      }
      theta += kJitter * d.cwiseSqrt();
      jittered = true;
      terms = evaluate(data, theta, d, m);
      if (terms.zero_radii > 0) {
        throw DegenerateData("zero standardized residual recurred with negative weight exponent");
      }
    }
    if (terms.zero_radii == n) throw DegenerateData("every observation equals the location");

    const HRResiduals res = residuals_from(terms, n, p);
    est.iterations = iter;
    est.residual_location = res.location;
    est.residual_scale = res.scale;
    if (hit_floor) {
      est.converged = false;
      break;
    }
    if (res.location <= opts.tol && res.scale <= opts.tol) {
      est.converged = true;
      break;
    }
    if (iter == opts.max_iter) {
      est.converged = false;
      break;
    }

    theta += d.cwiseSqrt().cwiseProduct(terms.weighted_sign_sum) / terms.step_denominator;
    d = d.cwiseProduct(static_cast<double>(p) * terms.sign_square_mean);
    for (double& v : d) {
      if (v < kScaleFloor) {
        v = kScaleFloor;
        hit_floor = true;
      }
    }
    if (!theta.allFinite() || !d.allFinite()) {
      throw NumericalFailure("HR iteration produced non-finite iterate at step " +
                             std::to_string(iter + 1));
    }
  }
  est.theta_hat = std::move(theta);
  est.d_hat = std::move(d);
  return est;
}

HREstimate leave_out_scale(const Sample& x, std::pair<Eigen::Index, Eigen::Index> excluded,
                           WeightExponent m, const SolverOptions& opts) {
  if (x.n() - 2 < 4) throw InvalidInput("leave-two-out sample needs n - 2 >= 4");
  return weighted_hr_estimate(x.without_rows(excluded.first, excluded.second), m, opts);
}

ScaleFit null_scale_estimate(const Sample& x, const SolverOptions& opts) {
  x.require_testable();
  if (!(opts.tol > 0.0)) throw InvalidInput("solver tolerance must be positive");
  if (opts.max_iter < 1) throw InvalidInput("solver max_iter must be >= 1");
  const Panel& data = x.values();
  const Eigen::Index n = x.n();
  const Eigen::Index p = x.p();
  const Vector origin = Vector::Zero(p);
  const WeightExponent m = WeightExponent::sign();

  ScaleFit fit;
  Vector d = data.colwise().squaredNorm().transpose() / static_cast<double>(n);
  if ((d.array() <= 0.0).any()) throw DegenerateData("a column is identically zero");
  for (int iter = 0;; ++iter) {
    const EquationTerms terms = evaluate(data, origin, d, m);
    if (terms.zero_radii == n) throw DegenerateData("every observation is zero");
    fit.iterations = iter;
    fit.residual = residuals_from(terms, n, p).scale;
    if (fit.residual <= opts.tol) {
      fit.converged = true;
      break;
    }
    if (iter == opts.max_iter) break;
    d = d.cwiseProduct(static_cast<double>(p) * terms.sign_square_mean).cwiseMax(kScaleFloor);
    if (!d.allFinite()) throw NumericalFailure("scale iteration produced a non-finite iterate");
  }
  fit.d_hat = std::move(d);
  return fit;
}

HRResiduals hr_residuals(const Sample& x, const Vector& theta, const Vector& d, WeightExponent m) {
  if (theta.size() != x.p() || !theta.allFinite()) throw InvalidInput("invalid location vector");
  check_scales(d, x.p());
  const EquationTerms terms = evaluate(x.values(), theta, d, m);
  if (terms.zero_radii == x.n()) throw DegenerateData("every observation equals the location");
  if (terms.zero_radii > 0 && m.value() < 0.0) {
    throw DegenerateData("zero standardized residual with negative weight exponent");
  }
  return residuals_from(terms, x.n(), x.p());
}

Vector standardized_radii(const Panel& x, const Vector& theta, const Vector& d) {
  const Eigen::RowVectorXd inv_scale = d.cwiseSqrt().cwiseInverse().transpose();
  return (x.rowwise() - theta.transpose()).cwiseProduct(inv_scale.replicate(x.rows(), 1))
      .rowwise()
      .norm();
}

void MomentEstimates::set(double k, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw NumericalFailure("moment estimate must be finite and positive");
  }
  values_[k] = value;
}

double MomentEstimates::at(double k) const {
  const auto it = values_.find(k);
  if (it == values_.end()) throw InvalidInput("moment zeta_" + std::to_string(k) + " not available");
  return it->second;
}

MomentEstimates moment_estimates(const Sample& x, const HREstimate& est,
                                 std::span<const double> exponents) {
  if (est.theta_hat.size() != x.p()) throw InvalidInput("estimate does not match sample");
  check_scales(est.d_hat, x.p());
  const Vector radii = standardized_radii(x.values(), est.theta_hat, est.d_hat);
  const bool has_zero = (radii.array() == 0.0).any();

  MomentEstimates out;
  for (double k : exponents) {
    if (!std::isfinite(k)) throw InvalidInput("moment exponent must be finite");
    if (k == 0.0) {
      out.set(0.0, 1.0);
      continue;
    }
    if (k < 0.0 && has_zero) {
      throw DegenerateData("zero radius with negative moment exponent");
    }
    double sum = 0.0;
    for (double r : radii) sum += std::pow(r, k);
    out.set(k, sum / static_cast<double>(radii.size()));
  }
  return out;
}

}  // namespace hdloc
