#include "hdloc/stats_util.hpp"

#include "hdloc/errors.hpp"
#include "hdloc/result.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hdloc {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidInput("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

std::string weighted_tag(double m, const std::string& family) {
  if (m == -1.0) return "IN-" + family;
  if (m == 0.0) return "SS-" + family;
  std::ostringstream os;
  os << "W(" << m << ")-" << family;
  return os.str();
}

double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<>(), x); }

double normal_sf(double x) {
  return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<>(), x));
}

double normal_upper_quantile(double alpha) {
  check_alpha(alpha);
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<>(), alpha));
}

double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(df), x));
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidInput("mean of empty range");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InvalidInput("variance needs at least two values");
  const double mu = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mu) * (x - mu);
  return ss / static_cast<double>(xs.size() - 1);
}

double correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InvalidInput("correlation needs paired data");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateData("correlation of a constant series");
  return sxy / std::sqrt(sxx * syy);
}

double quantile(std::vector<double> xs, double level) {
  if (xs.empty()) throw InvalidInput("quantile of empty range");
  std::sort(xs.begin(), xs.end());
  const double h = level * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

double ks_distance_uniform(std::vector<double> xs) {
  return ks_distance(std::move(xs), [](double u) { return std::clamp(u, 0.0, 1.0); });
}

}  // namespace hdloc
