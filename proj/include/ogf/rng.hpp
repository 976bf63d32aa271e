#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace ogf {

/// Deterministic random source. All draws are derived from the raw 64-bit
/// stream with fixed arithmetic so that results are reproducible across
/// platforms and standard-library versions. Every experiment seed flows
/// through here; no ambient entropy anywhere in the library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(split_mix(seed ^ 0x9e3779b97f4a7c15ULL)) {}

  /// Derive an independent stream, e.g. one per realization.
  Rng fork(std::uint64_t stream) const {
    return Rng(split_mix(state_ ^ split_mix(stream + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t next_u64() {
    // xorshift* generator; period 2^64-1.
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dULL;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, hi]; hi must be positive.
  double uniform_open(double hi) { return hi * (1.0 - uniform()); }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Unbiased integer in [0, bound); bound must be nonzero.
  std::uint64_t integer(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % bound;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t split_mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stable seed derivation for sub-streams (realizations, learners, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ (salt * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace ogf
