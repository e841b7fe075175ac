// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>

#include "mrv/morphology.hpp"
#include "mrv/rng.hpp"

using namespace mrv;

namespace {

// Brute-force oracle: r rounds of 4-connected dilation equal a Manhattan
// ball of radius r around every set bit.
Mask dilate_oracle(const Mask& in, int r) {
  Mask out(in.width(), in.height());
  for (int64_t y = 0; y < in.height(); ++y)
    for (int64_t x = 0; x < in.width(); ++x) {
      bool hit = false;
      for (int64_t dy = -r; dy <= r && !hit; ++dy)
        for (int64_t dx = -r; dx <= r && !hit; ++dx) {
          if (std::abs(dx) + std::abs(dy) > r) continue;
          int64_t sx = x + dx, sy = y + dy;
          if (sx < 0 || sy < 0 || sx >= in.width() || sy >= in.height()) continue;
          hit = in.at(static_cast<uint32_t>(sx), static_cast<uint32_t>(sy)) != 0;
        }
      out.set(static_cast<uint32_t>(x), static_cast<uint32_t>(y), hit);
    }
  return out;
}

// Erosion keeps a bit iff the whole Manhattan ball stays on set bits
// (out-of-bounds counts as background).
Mask erode_oracle(const Mask& in, int r) {
  Mask out(in.width(), in.height());
  for (int64_t y = 0; y < in.height(); ++y)
    for (int64_t x = 0; x < in.width(); ++x) {
      bool keep = in.at(static_cast<uint32_t>(x), static_cast<uint32_t>(y)) != 0;
      for (int64_t dy = -r; dy <= r && keep; ++dy)
        for (int64_t dx = -r; dx <= r && keep; ++dx) {
          if (std::abs(dx) + std::abs(dy) > r) continue;
          int64_t sx = x + dx, sy = y + dy;
          if (sx < 0 || sy < 0 || sx >= in.width() || sy >= in.height()) {
            keep = false;
            break;
          }
          keep = in.at(static_cast<uint32_t>(sx), static_cast<uint32_t>(sy)) != 0;
        }
      out.set(static_cast<uint32_t>(x), static_cast<uint32_t>(y), keep);
    }
  return out;
}

}  // namespace

TEST(Morphology, TwoByTwoSquareDilatesTo12Bits) {
  Mask m(16, 16);
  m.set(7, 7, 1);
  m.set(8, 7, 1);
  m.set(7, 8, 1);
  m.set(8, 8, 1);
  Mask d = dilate(m, 1);
  EXPECT_EQ(d.count(), 12u);
  EXPECT_EQ(d, dilate_oracle(m, 1));
}

TEST(Morphology, MatchesBruteForceOracle) {
  Rng rng(21);
  for (int it = 0; it < 15; ++it) {
    uint32_t w = 4 + rng.below(28), h = 4 + rng.below(28);
    Mask m(w, h);
    for (auto& b : m.bits()) b = rng.chance(0.25) ? 1 : 0;
    int r = 1 + static_cast<int>(rng.below(3));
    EXPECT_EQ(dilate(m, r), dilate_oracle(m, r));
    EXPECT_EQ(erode(m, r), erode_oracle(m, r));
  }
}

TEST(Morphology, ZeroRadiusIsIdentity) {
  Rng rng(22);
  Mask m(20, 20);
  for (auto& b : m.bits()) b = rng.chance(0.5) ? 1 : 0;
  EXPECT_EQ(dilate_or_erode(m, 0), m);
}

TEST(Morphology, SignedRadiusSelectsOperation) {
  Mask m(9, 9);
  for (uint32_t y = 3; y <= 5; ++y)
    for (uint32_t x = 3; x <= 5; ++x) m.set(x, y, 1);
  EXPECT_EQ(dilate_or_erode(m, 1), dilate(m, 1));
  EXPECT_EQ(dilate_or_erode(m, -1), erode(m, 1));
  EXPECT_EQ(erode(m, 1).count(), 1u);  // 3x3 erodes to its centre
}

TEST(Morphology, TranslatePreservesInBoundsCount) {
  Mask m(32, 32);
  for (uint32_t y = 10; y < 16; ++y)
    for (uint32_t x = 12; x < 20; ++x) m.set(x, y, 1);
  Mask t = translate(m, 5, -3);
  EXPECT_EQ(t.count(), m.count());
  EXPECT_EQ(t.at(17, 7), 1);
  // shove it off the edge and bits drop
  Mask off = translate(m, 30, 0);
  EXPECT_LT(off.count(), m.count());
}
