#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace hpo {

// 64-bit mix (splitmix64 finalizer), used for seeding and frozen embeddings.
inline std::uint64_t hash_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return hash_mix(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// Deterministic RNG with hand-rolled transforms so that streams are
// reproducible bit-for-bit regardless of the standard library's
// distribution implementations. All randomness in the library flows
// through this type. One Rng is owned per run and never shared.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : material_(seed), engine_(hash_mix(seed)) {}

  // Derives an independent stream from the original seed material.
  Rng substream(std::uint64_t stream_id) const {
    return Rng(hash_combine(material_, stream_id));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1).
  double uniform_open01() {
    double u = uniform01();
    return u > 0.0 ? u : std::numeric_limits<double>::min();
  }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; the spare deviate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Gumbel(0,1): -log(-log u), u clamped into (0,1).
  double gumbel() { return -std::log(-std::log(uniform_open01())); }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::uint64_t material_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hpo
