#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace hdloc {

template <typename Cdf>
double ks_distance(std::vector<double> xs, Cdf&& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double gap = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    gap = std::max(gap, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
  }
  return gap;
}

}  // namespace hdloc
