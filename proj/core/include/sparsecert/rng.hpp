/**
 * @file rng.hpp
 * @brief Deterministic random streams.
 *
 * All randomness in the library flows through a splitmix64 generator.  A
 * stream is addressed by (seed, purpose); the purpose string is hashed into
 * the seed so that independent stages of a pipeline draw from independent
 * streams and results stay reproducible when stages are added or reordered.
 */

#pragma once

#include <cstdint>
#include <string_view>

namespace sparsecert {

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Derives the substream for (seed, purpose).
  static Rng stream(std::uint64_t seed, std::string_view purpose);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal via Box-Muller (pair cached).
  double normal();

  /// Uniform integer in [lo, hi], inclusive.  Requires lo <= hi.
  int uniform_int(int lo, int hi);

  /// Fair +1 / -1.
  double sign();

 private:
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace sparsecert
