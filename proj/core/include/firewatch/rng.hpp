#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace firewatch {

inline constexpr double kTwoPi = 6.283185307179586476925287;

// Avalanche mixer used to derive stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for a named stream of a given trial. Distinct (seed, trial, name)
// triples give decorrelated streams, so module-level randomness stays
// decoupled and trials can run on any number of workers.
std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t trial,
                          std::string_view stream);

// Deterministic random stream. mt19937_64 output is fully specified by the
// standard; the uniform/normal transforms are done by hand because the
// std::*_distribution classes are implementation-defined and would break
// bit-reproducibility across toolchains.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}
  RngStream(std::uint64_t base_seed, std::uint64_t trial, std::string_view stream)
      : engine_(stream_seed(base_seed, trial, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, no spare caching: stream state advances by exactly two
  // engine draws per call regardless of call interleaving.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // [0, n). Modulo bias is irrelevant at our n; determinism is what matters.
  std::uint64_t uniform_int(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

  int binomial(int n, double p) {
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      if (uniform() < p) ++hits;
    }
    return hits;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace firewatch
