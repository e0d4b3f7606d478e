#pragma once

#include <cstdint>
#include <cmath>

namespace spinlab {

// Deterministic counter-seeded generator (xoshiro256++ state built from
// SplitMix64 over the (seed, stream) pair). All samplers below are written
// out explicitly rather than via <random> distributions so that a given
// (seed, stream) reproduces the same values bit-for-bit on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent stream derived from this generator's (seed, stream) identity.
  Rng split(std::uint64_t substream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl_(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl_(s_[3], 45);
    return result;
  }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n), n >= 1.
  std::uint64_t uniform_below(std::uint64_t n);
  bool bernoulli(double p);

  // Standard normal (Marsaglia polar).
  double normal();
  // N(0,1) conditioned on |x| < bound, sampled by inverse CDF on the
  // truncated interval so draws stay reproducible across modes.
  double truncated_normal(double bound);
  // Poisson by CDF inversion (sequential search); mean capped at 500.
  int poisson(double mean);

 private:
  static std::uint64_t rotl_(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Per-replica seed derivation used by every replica fan-out, so aggregate
// results do not depend on scheduling: hash(master_seed, replica_index).
std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t replica);

// Standard normal CDF and its inverse (Wichura AS241, double precision).
double normal_cdf(double x);
double normal_cdf_inv(double p);

}  // namespace spinlab
