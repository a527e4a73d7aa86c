#pragma once

#include <span>
#include <vector>

namespace hdloc {

double normal_cdf(double x);
// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x);
// Upper alpha quantile z_alpha.
double normal_upper_quantile(double alpha);

// Upper tail of the chi-square distribution with df degrees of freedom.
double chi_square_sf(double x, double df);

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);
double correlation(std::span<const double> xs, std::span<const double> ys);

// Empirical quantile with linear interpolation (type 7).
double quantile(std::vector<double> xs, double level);
double median(std::vector<double> xs);

// Kolmogorov-Smirnov distance between the empirical CDF of xs and U(0,1).
double ks_distance_uniform(std::vector<double> xs);

// KS distance against an arbitrary continuous CDF.
template <typename Cdf>
double ks_distance(std::vector<double> xs, Cdf&& cdf);

}  // namespace hdloc

#include "hdloc/stats_util_impl.hpp"
