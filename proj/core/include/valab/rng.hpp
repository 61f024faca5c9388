#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace valab {

/// Seeded random stream with platform-independent draws.
///
/// Only the raw 64-bit Mersenne Twister output is standardized by C++, so
/// every distribution used by the library is derived here from that output
/// rather than from <random>'s distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer on [0, n). Requires n > 0.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal (Marsaglia polar method).
  double normal();

  /// Gamma(shape, 1) draw (Marsaglia-Tsang, with the shape < 1 boost).
  double gamma(double shape);

  /// Index drawn with the given probabilities; zero-probability entries are
  /// never returned.
  std::size_t categorical(std::span<const double> probs);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Independent sub-seed for stream `stream` of a run seeded with `seed`
/// (splitmix64 finalizer over the pair).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace valab
