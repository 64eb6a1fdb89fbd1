#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>

#include "rigid_refine/rng.hpp"

using namespace rigid_refine;

namespace {

// Straight transcription of the published xoshiro256** reference, used as
// an oracle for the library generator.
struct RefXoshiro {
  std::array<std::uint64_t, 4> s;
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

}  // namespace

TEST_CASE("splitmix64 matches its published stream for seed 0") {
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(state) == 0x6e789e6aa1b965f4ULL);
  CHECK(splitmix64(state) == 0x06c45d188009454fULL);
  CHECK(splitmix64(state) == 0xf88bb8a8724c81ecULL);
}

TEST_CASE("the reference xoshiro256** transcription matches known outputs") {
  RefXoshiro x{{1, 2, 3, 4}};
  const std::uint64_t expected[] = {11520ULL, 0ULL, 1509978240ULL, 1215971899390074240ULL,
                                    1216172134540287360ULL, 607988272756665600ULL,
                                    16172922978634559625ULL, 8476171486693032832ULL,
                                    10595114339597558777ULL, 2904607092377533576ULL};
  for (std::uint64_t e : expected) CHECK(x.next() == e);
}

TEST_CASE("Rng is xoshiro256** seeded by four splitmix64 words") {
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL, ~0ULL}) {
    std::uint64_t state = seed;
    RefXoshiro ref{};
    for (auto& w : ref.s) w = splitmix64(state);
    Rng rng(seed);
    for (int i = 0; i < 1000; ++i) CHECK(rng.next() == ref.next());
  }
}

TEST_CASE("uniform draws use the top 53 bits") {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u == static_cast<double>(b.next() >> 11) * 0x1.0p-53);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng c(6);
  for (int i = 0; i < 1000; ++i) {
    const double v = c.uniform(-2.0, 3.0);
    CHECK(v >= -2.0);
    CHECK(v < 3.0);
  }
}

TEST_CASE("gaussian consumes two words and has unit moments") {
  Rng a(7), b(7);
  a.gaussian();
  b.next();
  b.next();
  CHECK(a.next() == b.next());

  Rng rng(8);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.gaussian();
    CHECK(std::isfinite(z));
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) <= 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(sq / n - mean * mean - 1.0) <= 0.02);
}

TEST_CASE("below is unbiased and in range") {
  Rng rng(9);
  int counts[6] = {};
  for (int i = 0; i < 60000; ++i) {
    const std::uint64_t k = rng.below(6);
    REQUIRE(k < 6);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) <= 400);
  CHECK(rng.below(1) == 0);
}
