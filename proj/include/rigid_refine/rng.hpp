#pragma once

#include <cstdint>

namespace rigid_refine {

/// xoshiro256** 1.0 (Blackman and Vigna), state seeded by four successive
/// splitmix64 outputs of the 64-bit seed. The output stream is fully
/// specified by these two published algorithms, so seeds reproduce bit for
/// bit on every platform.
///
/// Derived draws:
///   uniform()  = (next() >> 11) * 2^-53, in [0, 1)
///   gaussian() = Box-Muller on two uniforms, u1 mapped to (0, 1] as 1 - u;
///                the sine branch is discarded so each call consumes exactly
///                two words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi);
  double gaussian();
  /// Uniform integer in [0, n) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace rigid_refine
