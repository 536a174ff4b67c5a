#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace moran {

// splitmix64 finalizer; used to whiten seeds and derive independent streams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic random stream. The raw generator is std::mt19937_64, whose
// output sequence is pinned by the standard; every variate transform is done
// here by hand because std::*_distribution results are implementation-defined
// and would break cross-platform reproducibility of trajectories.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix64(seed)) {}

  // Independent stream for (master, part...); mixing is order-sensitive.
  template <typename... Parts>
  static Rng stream(std::uint64_t master, Parts... parts) {
    return Rng(stream_seed(master, parts...));
  }

  // The derived seed itself, for recording in run manifests.
  template <typename... Parts>
  static std::uint64_t stream_seed(std::uint64_t master, Parts... parts) {
    std::uint64_t h = mix64(master);
    ((h = mix64(h ^ static_cast<std::uint64_t>(parts))), ...);
    return h;
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  bool bernoulli(double p) { return uniform01() < p; }

  // Unbiased uniform integer in [0, n); n >= 1.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Knuth multiplication method; means beyond 500 are split to keep
  // exp(-mean) away from underflow.
  std::int64_t poisson(double mean) {
    std::int64_t total = 0;
    while (mean > 500.0) {
      total += poisson(250.0);
      mean -= 250.0;
    }
    if (mean <= 0.0) return total;
    const double limit = std::exp(-mean);
    double p = 1.0;
    std::int64_t k = -1;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return total + k;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace moran
