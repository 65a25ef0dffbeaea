#pragma once

// Counter-based random streams. A stream is addressed by a key tuple such as
// (seed, tick, particle), so draws do not depend on evaluation order or on how
// work is split across threads.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace fbt {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t stream_key(std::uint64_t a) { return splitmix64(a); }

template <typename... Rest>
inline constexpr std::uint64_t stream_key(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return stream_key(splitmix64(a) ^ (b + 0x632be59bd9b4e019ULL), static_cast<std::uint64_t>(rest)...);
}

// SplitMix64 engine. Satisfies UniformRandomBitGenerator so it plugs into the
// <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t state = 0) : state_(state) {}

  template <typename... Keys>
  static constexpr Rng stream(std::uint64_t seed, Keys... keys) {
    return Rng(stream_key(seed, static_cast<std::uint64_t>(keys)...));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

  // Beta(a, b) through the gamma ratio.
  double beta(double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    const double x = ga(*this);
    const double y = gb(*this);
    return x / (x + y);
  }

 private:
  std::uint64_t state_;
};

}  // namespace fbt
