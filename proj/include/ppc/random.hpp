#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ppc {

// 64-bit mix used for seed derivation and counter-based noise. splitmix64.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ (value + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2)));
}

// Seeded generator with hand-rolled transforms so the produced sequences do
// not depend on the standard library's distribution implementations. The raw
// mt19937_64 output sequence is specified by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 mantissa bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Modulo bias is < 2^-40 for the pool sizes used here.
    return engine_() % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; one value per call, the pair partner is cached.
  double normal(double mean = 0.0, double sigma = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sigma * spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return mean + sigma * r * std::cos(a);
  }

  double lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Standard normal from a 64-bit counter key; used by the noisy critic so that
// re-evaluating the same pose returns the same noise draw.
inline double counter_normal(std::uint64_t key) {
  const std::uint64_t a = mix64(key);
  const std::uint64_t b = mix64(a ^ 0xd1b54a32d192ed03ull);
  double u1 = static_cast<double>(a >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace ppc
