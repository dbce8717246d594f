#ifndef UNMIX_RANDOM_HPP
#define UNMIX_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace unmix {

// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The distributions below are written out because the standard
// library ones are implementation-defined, and every stream in this library
// must reproduce bit-for-bit on any toolchain.

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a list of integers into one well-mixed 64-bit seed.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (auto part : parts)
    h = mix64(h ^ mix64(part));
  return h;
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection on the top of the range removes modulo bias.
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool bernoulli(double prob) {
    if (prob <= 0.0)
      return false;
    if (prob >= 1.0)
      return true;
    return uniform() < prob;
  }

  /// Standard normal deviate (Marsaglia polar method, one value per call).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  /// Unit-rate exponential deviate.
  double exponential() { return -std::log1p(-uniform()); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace unmix

#endif // UNMIX_RANDOM_HPP
