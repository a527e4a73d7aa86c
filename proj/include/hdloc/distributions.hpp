#pragma once

#include "hdloc/rng.hpp"
#include "hdloc/sample.hpp"
#include "hdloc/sign_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>

namespace hdloc {

// Law of the mixing variable v in X = theta + v * Gamma * W with W ~ N(0, I).
//   Normal:      v = 1
//   StudentT:    v = sqrt(df / chi2_df)     (Sigma is the scatter matrix)
//   Mixture:     v = sigma w.p. gamma, 1 otherwise, i.e. density
//                (1 - gamma) f(0, S) + gamma f(0, sigma^2 S)
struct RadialLaw {
  enum class Kind { Normal, StudentT, Mixture };

  Kind kind = Kind::Normal;
  double df = 0.0;
  double gamma = 0.0;
  double sigma = 1.0;

  static RadialLaw normal();
  static RadialLaw student_t(double df);
  static RadialLaw mixture(double gamma, double sigma);

  void validate() const;
  std::string label() const;
};

// E(v^k) in closed form. StudentT needs k < df.
double radial_moment(const RadialLaw& law, double k);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

double draw_mixing(const RadialLaw& law, Rng& rng);

// E(v^k) by drawing v directly.
MonteCarloEstimate radial_moment_mc(const RadialLaw& law, double k, std::int64_t draws,
                                    std::uint64_t seed);

// Radius moments in the large-p limit, zeta_k ~ p^{k/2} E(v^k).
MomentEstimates limit_radius_moments(const RadialLaw& law, Eigen::Index p,
                                     std::span<const double> exponents);

struct CovarianceSpec {
  enum class Kind { Identity, Ar1, Custom };

  Kind kind = Kind::Identity;
  Eigen::Index p = 0;
  double rho = 0.0;
  Eigen::MatrixXd custom;

  static CovarianceSpec identity(Eigen::Index p);
  static CovarianceSpec ar1(Eigen::Index p, double rho);
  static CovarianceSpec from_matrix(Eigen::MatrixXd sigma);
};

struct Covariance {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd factor;  // lower triangular, factor * factor^T = sigma
  double trace_r_sq = 0.0; // tr(R^2), R = D^{-1/2} Sigma D^{-1/2}, D = diag(Sigma)
};

Covariance make_covariance(const CovarianceSpec& spec);

// sum_{i,j} rho^{2|i-j|} summed as a geometric series.
double ar1_trace_r_sq(Eigen::Index p, double rho);

// theta = (kappa, ..., kappa, 0, ..., 0) with kappa = sqrt(delta / s) on the
// first s coordinates.
struct SignalSpec {
  double delta = 0.0;
  Eigen::Index s = 0;

  void validate(Eigen::Index p) const;
  Vector theta(Eigen::Index p) const;
};

// The four simulation settings, all with Sigma = (0.5^{|i-j|}):
//   I   N(theta, Sigma)
//   II  t_4(theta, Sigma)
//   III MN(0.8, 3, theta, Sigma)   (gamma = 0.8 read literally)
//   IV  MN(0.2, 3, theta, Sigma)
enum class Setting { I, II, III, IV };

Setting parse_setting(const std::string& text);
std::string to_string(Setting s);

struct Design {
  RadialLaw law;
  CovarianceSpec covariance;
};

Design design_for(Setting setting, Eigen::Index p);

// n rows of theta + v_i * Gamma * W_i, drawn from rng.
Sample sample_panel(const RadialLaw& law, const Covariance& cov, Eigen::Index n,
                    const SignalSpec& signal, Rng& rng);

// Seeded convenience form; the stream is (seed, replication, 0).
Sample sample_panel(Setting setting, Eigen::Index n, Eigen::Index p, const SignalSpec& signal,
                    std::uint64_t seed, std::uint64_t replication = 0);

}  // namespace hdloc
