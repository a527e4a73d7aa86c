#pragma once

#include "hdloc/rng.hpp"
#include "hdloc/sample.hpp"

#include <random>

namespace hdloc::testing {

// n x p panel of independent N(mean, 1) draws.
inline Panel normal_panel(Eigen::Index n, Eigen::Index p, std::uint64_t seed, double mean = 0.0) {
  Rng rng(seed);
  std::normal_distribution<double> gauss(mean, 1.0);
  Panel x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = gauss(rng);
  }
  return x;
}

inline Sample normal_sample(Eigen::Index n, Eigen::Index p, std::uint64_t seed, double mean = 0.0) {
  return Sample(normal_panel(n, p, seed, mean));
}

}  // namespace hdloc::testing
