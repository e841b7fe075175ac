// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdlib>

#include "mrv/image.hpp"

namespace mrv {

namespace detail {

// One 4-connected (von Neumann) dilation or erosion pass. Out-of-bounds
// neighbours are background, so erosion eats content touching the border.
inline Mask morph_step(const Mask& in, bool dilate) {
  const uint32_t w = in.width(), h = in.height();
  Mask out(w, h);
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      uint8_t c = in.at(x, y);
      uint8_t l = x > 0 ? in.at(x - 1, y) : 0;
      uint8_t r = x + 1 < w ? in.at(x + 1, y) : 0;
      uint8_t u = y > 0 ? in.at(x, y - 1) : 0;
      uint8_t d = y + 1 < h ? in.at(x, y + 1) : 0;
      out.set(x, y, dilate ? (c | l | r | u | d) : (c & l & r & u & d));
    }
  }
  return out;
}

}  // namespace detail

/// radius iterations of 4-connected dilation.
inline Mask dilate(const Mask& mask, int radius) {
  Mask out = mask;
  for (int i = 0; i < radius; ++i) out = detail::morph_step(out, true);
  return out;
}

/// radius iterations of 4-connected erosion. Out-of-bounds neighbours count
/// as background, so content touching the border erodes from the border too.
inline Mask erode(const Mask& mask, int radius) {
  Mask out = mask;
  for (int i = 0; i < radius; ++i) out = detail::morph_step(out, false);
  return out;
}

/// Signed radius: positive dilates, negative erodes, zero is the identity.
inline Mask dilate_or_erode(const Mask& mask, int signed_radius) {
  if (signed_radius > 0) return dilate(mask, signed_radius);
  if (signed_radius < 0) return erode(mask, -signed_radius);
  return mask;
}

/// Integer translation; bits shifted outside the raster are dropped.
inline Mask translate(const Mask& mask, int dx, int dy) {
  const uint32_t w = mask.width(), h = mask.height();
  Mask out(w, h);
  for (uint32_t y = 0; y < h; ++y) {
    int64_t sy = static_cast<int64_t>(y) - dy;
    if (sy < 0 || sy >= static_cast<int64_t>(h)) continue;
    for (uint32_t x = 0; x < w; ++x) {
      int64_t sx = static_cast<int64_t>(x) - dx;
      if (sx < 0 || sx >= static_cast<int64_t>(w)) continue;
      out.bits()[static_cast<size_t>(y) * w + x] =
          mask.bits()[static_cast<size_t>(sy) * w + sx];
    }
  }
  return out;
}

}  // namespace mrv
