#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace codedge {

// SplitMix64 (Steele/Lea/Flood). One 64-bit word of state, full-period,
// and cheap to fork into independent derived streams, which is what the
// simulator, policies, and Monte-Carlo estimators each want to own.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe to feed into log().
  double next_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Independent stream derived from this generator's state and a salt.
  // Does not advance this generator.
  SplitMix64 split(std::uint64_t salt) const {
    SplitMix64 child(state_ ^ (0x632be59bd9b4e019ULL * (salt + 1)));
    child.next_u64();
    return child;
  }

 private:
  std::uint64_t state_;
};

// Number of slots until a transmission over a link with per-slot
// disconnection probability p succeeds: Pr(H = x) = p^(x-1)(1-p), x >= 1.
inline long long sample_retransmissions(double p, SplitMix64& rng) {
  if (!(p >= 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("disconnect probability must lie in [0, 1)");
  }
  if (p == 0.0) return 1;
  const double u = rng.next_open();
  return 1 + static_cast<long long>(std::floor(std::log(u) / std::log(p)));
}

// Stochastic memory-access component of compute time: Exp(rate) seconds.
inline double sample_straggle(double rate, SplitMix64& rng) {
  if (!(rate > 0.0)) {
    throw std::invalid_argument("straggle rate must be positive");
  }
  return -std::log(rng.next_open()) / rate;
}

}  // namespace codedge
