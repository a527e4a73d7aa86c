#pragma once

#include <cstdint>
#include <limits>

namespace hdloc {

// xoshiro256** keyed by (master seed, replication, stream). Each key expands
// through splitmix64, so every replication owns an independent stream and
// results do not depend on how replications are scheduled.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t master_seed, std::uint64_t replication, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace hdloc
