// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include "mrv/error.hpp"

namespace mrv {

/// Interleaved RGB8 raster, row-major, top-left origin. Immutable by
/// convention: operations return new frames and never mutate inputs.
class Frame {
 public:
  Frame() = default;
  Frame(uint32_t w, uint32_t h) : w_(w), h_(h), px_(static_cast<size_t>(w) * h * 3, 0) {
    check_dims(w, h);
  }
  Frame(uint32_t w, uint32_t h, std::vector<uint8_t> rgb) : w_(w), h_(h), px_(std::move(rgb)) {
    check_dims(w, h);
    if (px_.size() != static_cast<size_t>(w) * h * 3)
      raise(Errc::DimensionMismatch, "pixel buffer length must be width*height*3");
  }

  uint32_t width() const { return w_; }
  uint32_t height() const { return h_; }
  const std::vector<uint8_t>& pixels() const { return px_; }
  std::vector<uint8_t>& pixels() { return px_; }

  const uint8_t* at(uint32_t x, uint32_t y) const {
    return px_.data() + (static_cast<size_t>(y) * w_ + x) * 3;
  }
  uint8_t* at(uint32_t x, uint32_t y) { return px_.data() + (static_cast<size_t>(y) * w_ + x) * 3; }

  void set(uint32_t x, uint32_t y, uint8_t r, uint8_t g, uint8_t b) {
    uint8_t* p = at(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  bool operator==(const Frame& o) const { return w_ == o.w_ && h_ == o.h_ && px_ == o.px_; }

 private:
  static void check_dims(uint32_t w, uint32_t h) {
    if (w < 1 || h < 1) raise(Errc::DimensionMismatch, "frame dimensions must be >= 1");
  }
  uint32_t w_ = 0, h_ = 0;
  std::vector<uint8_t> px_;
};

/// Binary raster; one byte per pixel, each element 0 or 1.
class Mask {
 public:
  Mask() = default;
  Mask(uint32_t w, uint32_t h) : w_(w), h_(h), bits_(static_cast<size_t>(w) * h, 0) {}
  Mask(uint32_t w, uint32_t h, std::vector<uint8_t> bits) : w_(w), h_(h), bits_(std::move(bits)) {
    if (bits_.size() != static_cast<size_t>(w) * h)
      raise(Errc::DimensionMismatch, "mask buffer length must be width*height");
  }

  uint32_t width() const { return w_; }
  uint32_t height() const { return h_; }
  const std::vector<uint8_t>& bits() const { return bits_; }
  std::vector<uint8_t>& bits() { return bits_; }

  uint8_t at(uint32_t x, uint32_t y) const { return bits_[static_cast<size_t>(y) * w_ + x]; }
  void set(uint32_t x, uint32_t y, uint8_t v) { bits_[static_cast<size_t>(y) * w_ + x] = v ? 1 : 0; }

  size_t count() const {
    size_t n = 0;
    for (uint8_t b : bits_) n += b;
    return n;
  }
  bool empty() const {
    return std::all_of(bits_.begin(), bits_.end(), [](uint8_t b) { return b == 0; });
  }

  bool operator==(const Mask& o) const { return w_ == o.w_ && h_ == o.h_ && bits_ == o.bits_; }

 private:
  uint32_t w_ = 0, h_ = 0;
  std::vector<uint8_t> bits_;
};

/// Axis-aligned crop area, in parent-frame pixel coordinates.
struct Region {
  uint32_t x = 0, y = 0, w = 0, h = 0;

  bool within(uint32_t frame_w, uint32_t frame_h) const {
    return w >= 1 && h >= 1 && x + w <= frame_w && y + h <= frame_h &&
           x + w >= x && y + h >= y;  // overflow guard
  }
  static Region full(const Frame& f) { return Region{0, 0, f.width(), f.height()}; }
  bool operator==(const Region&) const = default;
};

inline Frame crop(const Frame& frame, const Region& region) {
  if (!region.within(frame.width(), frame.height()))
    raise(Errc::RegionOutOfBounds, "crop region exceeds frame bounds");
  Frame out(region.w, region.h);
  for (uint32_t j = 0; j < region.h; ++j) {
    std::memcpy(out.at(0, j), frame.at(region.x, region.y + j), static_cast<size_t>(region.w) * 3);
  }
  return out;
}

inline Mask crop(const Mask& mask, const Region& region) {
  if (!region.within(mask.width(), mask.height()))
    raise(Errc::RegionOutOfBounds, "crop region exceeds mask bounds");
  Mask out(region.w, region.h);
  for (uint32_t j = 0; j < region.h; ++j) {
    std::memcpy(&out.bits()[static_cast<size_t>(j) * region.w],
                &mask.bits()[static_cast<size_t>(region.y + j) * mask.width() + region.x],
                region.w);
  }
  return out;
}

namespace detail {

inline uint32_t scaled_extent(uint32_t v, double alpha) {
  return std::max<uint32_t>(1, static_cast<uint32_t>(std::floor(alpha * v)));
}

// Maps an output pixel centre back to input coordinates. ratio == in/out, so
// ratio 1 yields src == x and downstream interpolation becomes the identity.
inline double src_coord(uint32_t x, double ratio) { return (x + 0.5) * ratio - 0.5; }

}  // namespace detail

/// Bilinear resample to (max(1, floor(alpha*w)), max(1, floor(alpha*h))).
inline Frame scale(const Frame& frame, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) raise(Errc::InvalidAlpha, "alpha must be in (0,1]");
  const uint32_t ow = detail::scaled_extent(frame.width(), alpha);
  const uint32_t oh = detail::scaled_extent(frame.height(), alpha);
  if (ow == frame.width() && oh == frame.height()) return frame;

  Frame out(ow, oh);
  const double rx = static_cast<double>(frame.width()) / ow;
  const double ry = static_cast<double>(frame.height()) / oh;
  for (uint32_t y = 0; y < oh; ++y) {
    double sy = std::clamp(detail::src_coord(y, ry), 0.0, frame.height() - 1.0);
    uint32_t y0 = static_cast<uint32_t>(sy);
    uint32_t y1 = std::min(y0 + 1, frame.height() - 1);
    double fy = sy - y0;
    for (uint32_t x = 0; x < ow; ++x) {
      double sx = std::clamp(detail::src_coord(x, rx), 0.0, frame.width() - 1.0);
      uint32_t x0 = static_cast<uint32_t>(sx);
      uint32_t x1 = std::min(x0 + 1, frame.width() - 1);
      double fx = sx - x0;
      const uint8_t* p00 = frame.at(x0, y0);
      const uint8_t* p10 = frame.at(x1, y0);
      const uint8_t* p01 = frame.at(x0, y1);
      const uint8_t* p11 = frame.at(x1, y1);
      uint8_t* dst = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        double v = (1 - fy) * ((1 - fx) * p00[c] + fx * p10[c]) +
                   fy * ((1 - fx) * p01[c] + fx * p11[c]);
        dst[c] = static_cast<uint8_t>(std::lround(v));
      }
    }
  }
  return out;
}

/// Nearest-neighbour resample for masks (keeps values binary). Same
/// floor-with-min-1 dimension rule as frame scaling, but an arbitrary target
/// size is also accepted so masks can follow a frame that was scaled earlier.
inline Mask scale_mask_to(const Mask& mask, uint32_t ow, uint32_t oh) {
  if (ow < 1 || oh < 1) raise(Errc::DimensionMismatch, "target mask dimensions must be >= 1");
  if (ow == mask.width() && oh == mask.height()) return mask;
  Mask out(ow, oh);
  const double rx = static_cast<double>(mask.width()) / ow;
  const double ry = static_cast<double>(mask.height()) / oh;
  for (uint32_t y = 0; y < oh; ++y) {
    uint32_t sy = std::min(static_cast<uint32_t>(std::max(0.0, std::floor((y + 0.5) * ry))),
                           mask.height() - 1);
    for (uint32_t x = 0; x < ow; ++x) {
      uint32_t sx = std::min(static_cast<uint32_t>(std::max(0.0, std::floor((x + 0.5) * rx))),
                             mask.width() - 1);
      out.bits()[static_cast<size_t>(y) * ow + x] = mask.at(sx, sy);
    }
  }
  return out;
}

inline Mask scale_mask(const Mask& mask, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0) raise(Errc::InvalidAlpha, "alpha must be in (0,1]");
  return scale_mask_to(mask, detail::scaled_extent(mask.width(), alpha),
                       detail::scaled_extent(mask.height(), alpha));
}

/// Mask bit is 1 iff any channel of the pixel is non-zero.
inline Mask binary_filter(const Frame& layer) {
  Mask out(layer.width(), layer.height());
  const uint8_t* p = layer.pixels().data();
  uint8_t* b = out.bits().data();
  const size_t n = static_cast<size_t>(layer.width()) * layer.height();
  for (size_t i = 0; i < n; ++i, p += 3) {
    b[i] = (p[0] | p[1] | p[2]) ? 1 : 0;
  }
  return out;
}

/// BT.601 luma, used by the frame-similarity metrics.
inline double luma(const uint8_t* px) { return 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2]; }

inline std::vector<double> luma_plane(const Frame& f) {
  std::vector<double> out(static_cast<size_t>(f.width()) * f.height());
  const uint8_t* p = f.pixels().data();
  for (size_t i = 0; i < out.size(); ++i, p += 3) out[i] = luma(p);
  return out;
}

}  // namespace mrv
