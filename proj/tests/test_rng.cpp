#include <gtest/gtest.h>

#include <set>

#include "qrc/rng.hpp"

namespace {

TEST(Rng, SplitMixReferenceValues) {
  // SplitMix64 seeded with 0 starts 0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4.
  qrc::Rng rng(0);
  EXPECT_EQ(rng.next_u64(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next_u64(), 0x6E789E6AA1B965F4ULL);
}

TEST(Rng, SameSeedSameStream) {
  qrc::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformInRange) {
  qrc::Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform(-1.0, 1.0);
    EXPECT_GE(u, -1.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(qrc::derive_seed(99, {a, b}));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_NE(qrc::derive_seed(1, {0, 1}), qrc::derive_seed(1, {1, 0}));
}

TEST(Rng, SampleWithoutReplacementIsDistinct) {
  qrc::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = qrc::sample_without_replacement(9, 4, rng);
    std::set<std::size_t> u(s.begin(), s.end());
    EXPECT_EQ(u.size(), 4u);
    for (auto v : s) EXPECT_LT(v, 9u);
  }
}

TEST(Rng, NormalMoments) {
  qrc::Rng rng(11);
  double s = 0, ss = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    ss += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(ss / n, 1.0, 0.02);
}

}  // namespace
