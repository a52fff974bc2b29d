#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace noisyfpr {

/// Seeded generator with platform-independent derived distributions.
///
/// std::uniform_*_distribution and std::shuffle are implementation-defined, so
/// everything that feeds a reproducible artifact goes through this wrapper.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1]; safe argument for log().
  double uniform_open_zero() { return 1.0 - uniform(); }

  /// Uniform integer in [0, bound), rejection sampled. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  double normal() {
    // Box-Muller; one value per call keeps the stream position simple.
    const double u1 = uniform_open_zero();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates.
  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Stage-keyed child seed: splitmix64(master ^ fnv1a64(stage)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage);

/// Half-up rounding of a non-negative quantity. A 1e-9 slack absorbs binary
/// representation error so that e.g. 0.3 * 15 rounds as 4.5 would.
std::int64_t round_half_up(double x);

}  // namespace noisyfpr
