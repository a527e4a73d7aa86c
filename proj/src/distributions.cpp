#include "hdloc/distributions.hpp"

#include "hdloc/errors.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <random>
#include <sstream>

namespace hdloc {

RadialLaw RadialLaw::normal() { return RadialLaw{}; }

RadialLaw RadialLaw::student_t(double df) {
  RadialLaw law;
  law.kind = Kind::StudentT;
  law.df = df;
  law.validate();
  return law;
}

RadialLaw RadialLaw::mixture(double gamma, double sigma) {
  RadialLaw law;
  law.kind = Kind::Mixture;
  law.gamma = gamma;
  law.sigma = sigma;
  law.validate();
  return law;
}

void RadialLaw::validate() const {
  switch (kind) {
    case Kind::Normal:
      return;
    case Kind::StudentT:
      if (!(df > 2.0) || !std::isfinite(df)) throw InvalidInput("t law needs df > 2");
      return;
    case Kind::Mixture:
      if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("mixture weight gamma must lie in (0, 1)");
      if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("mixture sigma must be positive");
      return;
  }
}

std::string RadialLaw::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Normal:
      os << "normal";
      break;
    case Kind::StudentT:
      os << "t(" << df << ")";
      break;
    case Kind::Mixture:
      os << "MN(" << gamma << "," << sigma << ")";
      break;
  }
  return os.str();
}

double radial_moment(const RadialLaw& law, double k) {
  law.validate();
  if (!std::isfinite(k)) throw InvalidInput("moment exponent must be finite");
  switch (law.kind) {
    case RadialLaw::Kind::Normal:
      return 1.0;
    case RadialLaw::Kind::StudentT: {
      // v^k = df^{k/2} (chi2_df)^{-k/2};  E (chi2_df)^a = 2^a Gamma(df/2 + a) / Gamma(df/2).
      if (!(k < law.df)) {
        std::ostringstream os;
        os << "E(v^" << k << ") does not exist for " << law.label();
        throw InvalidInput(os.str());
      }
      const double half = 0.5 * law.df;
      return std::exp(0.5 * k * std::log(law.df) - 0.5 * k * std::log(2.0) +
                      std::lgamma(half - 0.5 * k) - std::lgamma(half));
    }
    case RadialLaw::Kind::Mixture:
      return (1.0 - law.gamma) + law.gamma * std::pow(law.sigma, k);
  }
  return 1.0;
}

double draw_mixing(const RadialLaw& law, Rng& rng) {
  switch (law.kind) {
    case RadialLaw::Kind::Normal:
      return 1.0;
    case RadialLaw::Kind::StudentT: {
      std::chi_squared_distribution<double> chi2(law.df);
      return std::sqrt(law.df / chi2(rng));
    }
    case RadialLaw::Kind::Mixture:
      return rng.uniform() < law.gamma ? law.sigma : 1.0;
  }
  return 1.0;
}

MonteCarloEstimate radial_moment_mc(const RadialLaw& law, double k, std::int64_t draws,
                                    std::uint64_t seed) {
  law.validate();
  if (draws < 2) throw InvalidInput("Monte Carlo moment needs at least 2 draws");
  if (law.kind == RadialLaw::Kind::StudentT && !(k < law.df)) {
    throw InvalidInput("moment does not exist for " + law.label());
  }
  Rng rng(seed, 0, 1);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    const double y = std::pow(draw_mixing(law, rng), k);
    const double delta = y - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (y - mean);
  }
  MonteCarloEstimate out;
  out.value = mean;
  out.std_error = std::sqrt(m2 / static_cast<double>(draws - 1) / static_cast<double>(draws));
  return out;
}

MomentEstimates limit_radius_moments(const RadialLaw& law, Eigen::Index p,
                                     std::span<const double> exponents) {
  if (p < 1) throw InvalidInput("dimension must be positive");
  MomentEstimates out;
  for (double k : exponents) {
    out.set(k, std::pow(static_cast<double>(p), 0.5 * k) * radial_moment(law, k));
  }
  return out;
}

CovarianceSpec CovarianceSpec::identity(Eigen::Index p) {
  CovarianceSpec s;
  s.kind = Kind::Identity;
  s.p = p;
  return s;
}

CovarianceSpec CovarianceSpec::ar1(Eigen::Index p, double rho) {
  CovarianceSpec s;
  s.kind = Kind::Ar1;
  s.p = p;
  s.rho = rho;
  return s;
}

CovarianceSpec CovarianceSpec::from_matrix(Eigen::MatrixXd sigma) {
  CovarianceSpec s;
  s.kind = Kind::Custom;
  s.p = sigma.rows();
  s.custom = std::move(sigma);
  return s;
}

double ar1_trace_r_sq(Eigen::Index p, double rho) {
  const double r = rho * rho;
  const double pp = static_cast<double>(p);
  if (r == 0.0) return pp;
  if (r == 1.0) return pp * pp;
  // sum_{k=1}^{p-1} (p - k) r^k = p S1 - S2 with
  //   S1 = sum r^k = r (1 - r^{p-1}) / (1 - r),
  //   S2 = sum k r^k = r (1 - p r^{p-1} + (p-1) r^p) / (1 - r)^2.
  const double rp1 = std::pow(r, pp - 1.0);
  const double s1 = r * (1.0 - rp1) / (1.0 - r);
  const double s2 = r * (1.0 - pp * rp1 + (pp - 1.0) * rp1 * r) / ((1.0 - r) * (1.0 - r));
  return pp + 2.0 * (pp * s1 - s2);
}

Covariance make_covariance(const CovarianceSpec& spec) {
  if (spec.p < 1) throw InvalidInput("covariance dimension must be positive");
  Covariance out;
  const Eigen::Index p = spec.p;
  switch (spec.kind) {
    case CovarianceSpec::Kind::Identity:
      out.sigma = Eigen::MatrixXd::Identity(p, p);
      out.factor = out.sigma;
      out.trace_r_sq = static_cast<double>(p);
      return out;
    case CovarianceSpec::Kind::Ar1: {
      if (!(std::abs(spec.rho) < 1.0)) throw InvalidInput("AR(1) correlation must satisfy |rho| < 1");
      out.sigma.resize(p, p);
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
          out.sigma(i, j) = std::pow(spec.rho, static_cast<double>(std::abs(i - j)));
        }
      }
      out.trace_r_sq = ar1_trace_r_sq(p, spec.rho);
      break;
    }
    case CovarianceSpec::Kind::Custom: {
      if (spec.custom.rows() != p || spec.custom.cols() != p) {
        throw InvalidInput("custom covariance must be p x p");
      }
      if (!spec.custom.allFinite() || !spec.custom.isApprox(spec.custom.transpose(), 1e-12)) {
        throw InvalidInput("custom covariance must be finite and symmetric");
      }
      out.sigma = spec.custom;
      const Vector inv_sd = out.sigma.diagonal().cwiseSqrt().cwiseInverse();
      out.trace_r_sq = (inv_sd.asDiagonal() * out.sigma * inv_sd.asDiagonal()).squaredNorm();
      break;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(out.sigma);
  if (llt.info() != Eigen::Success) throw InvalidInput("covariance is not positive definite");
  out.factor = llt.matrixL();
  return out;
}

void SignalSpec::validate(Eigen::Index p) const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidInput("signal delta must be >= 0");
  if (s < 0 || s > p) throw InvalidInput("signal sparsity s must lie in [0, p]");
  if (delta > 0.0 && s == 0) throw InvalidInput("nonzero delta needs s >= 1");
}

Vector SignalSpec::theta(Eigen::Index p) const {
  validate(p);
  Vector out = Vector::Zero(p);
  if (delta == 0.0) return out;
  const double kappa = std::sqrt(delta / static_cast<double>(s));
  out.head(s).setConstant(kappa);
  return out;
}

Setting parse_setting(const std::string& text) {
  if (text == "i" || text == "I" || text == "1") return Setting::I;
  if (text == "ii" || text == "II" || text == "2") return Setting::II;
  if (text == "iii" || text == "III" || text == "3") return Setting::III;
  if (text == "iv" || text == "IV" || text == "4") return Setting::IV;
  throw InvalidInput("unknown setting: " + text);
}

std::string to_string(Setting s) {
  switch (s) {
    case Setting::I:
      return "i";
    case Setting::II:
      return "ii";
    case Setting::III:
      return "iii";
    case Setting::IV:
      return "iv";
  }
  return "?";
}

Design design_for(Setting setting, Eigen::Index p) {
  Design d;
  d.covariance = CovarianceSpec::ar1(p, 0.5);
  switch (setting) {
    case Setting::I:
      d.law = RadialLaw::normal();
      break;
    case Setting::II:
      d.law = RadialLaw::student_t(4.0);
      break;
    case Setting::III:
      d.law = RadialLaw::mixture(0.8, 3.0);
      break;
    case Setting::IV:
      d.law = RadialLaw::mixture(0.2, 3.0);
      break;
  }
  return d;
}

Sample sample_panel(const RadialLaw& law, const Covariance& cov, Eigen::Index n,
                    const SignalSpec& signal, Rng& rng) {
  law.validate();
  const Eigen::Index p = cov.sigma.rows();
  if (n < 1) throw InvalidInput("panel needs n >= 1");
  const Vector theta = signal.theta(p);

  std::normal_distribution<double> gauss;
  Panel z(n, p);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = gauss(rng);
    v[i] = draw_mixing(law, rng);
  }
  Panel x = z * cov.factor.transpose().triangularView<Eigen::Upper>();
  x = v.asDiagonal() * x;
  x.rowwise() += theta.transpose();
  return Sample(std::move(x));
}

Sample sample_panel(Setting setting, Eigen::Index n, Eigen::Index p, const SignalSpec& signal,
                    std::uint64_t seed, std::uint64_t replication) {
  const Design design = design_for(setting, p);
  const Covariance cov = make_covariance(design.covariance);
  Rng rng(seed, replication, 0);
  return sample_panel(design.law, cov, n, signal, rng);
}

}  // namespace hdloc
