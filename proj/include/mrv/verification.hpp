// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mrv/error.hpp"
#include "mrv/image.hpp"

namespace mrv {

struct VerificationPolicy {
  double threshold = 0.5;  // in [0,1]; pass requires iou strictly above it
};

struct MaskCandidate {
  int class_id = 0;
  Mask mask;
  double confidence = 1.0;
};

struct SegmentationOutput {
  std::vector<MaskCandidate> candidates;
};

struct VerificationDecision {
  double iou = 0.0;
  bool pass = false;
  std::optional<size_t> chosen_index;
  size_t candidate_count = 0;
};

/// |a AND b| / |a OR b| for two binary masks of equal dimensions.
inline double iou(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height())
    raise(Errc::DimensionMismatch, "iou operands must share dimensions");
  size_t inter = 0, uni = 0;
  const uint8_t* pa = a.bits().data();
  const uint8_t* pb = b.bits().data();
  const size_t n = a.bits().size();
  for (size_t i = 0; i < n; ++i) {
    inter += pa[i] & pb[i];
    uni += pa[i] | pb[i];
  }
  if (uni == 0) raise(Errc::EmptyUnion, "both masks are empty");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Max-IoU candidate selection with a strict threshold: pass iff the best
/// candidate IoU exceeds policy.threshold. No candidates means iou 0, fail.
inline VerificationDecision verify(const Mask& reference, const SegmentationOutput& candidates,
                                   const VerificationPolicy& policy) {
  if (reference.empty()) raise(Errc::EmptyReferenceMask, "reference mask has no set bits");
  VerificationDecision d;
  d.candidate_count = candidates.candidates.size();
  for (size_t i = 0; i < candidates.candidates.size(); ++i) {
    const Mask& m = candidates.candidates[i].mask;
    if (m.width() != reference.width() || m.height() != reference.height())
      raise(Errc::DimensionMismatch, "candidate mask dimensions differ from reference");
    double v = m.empty() ? 0.0 : iou(reference, m);
    if (!d.chosen_index || v > d.iou) {  // ties keep the lowest index
      d.iou = v;
      d.chosen_index = i;
    }
  }
  if (!d.chosen_index) d.iou = 0.0;
  d.pass = d.iou > policy.threshold;
  return d;
}

namespace detail {

inline void require_same_dims(const Frame& a, const Frame& b) {
  if (a.width() != b.width() || a.height() != b.height())
    raise(Errc::DimensionMismatch, "frames must share dimensions");
}

inline double mse(const Frame& a, const Frame& b) {
  const uint8_t* pa = a.pixels().data();
  const uint8_t* pb = b.pixels().data();
  const size_t n = a.pixels().size();
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double d = static_cast<double>(pa[i]) - pb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(n);
}

// Inclusive-prefix summed-area table over a double plane, (w+1)x(h+1).
struct Integral {
  uint32_t w, h;
  std::vector<double> s;
  Integral(const std::vector<double>& plane, uint32_t w_, uint32_t h_)
      : w(w_), h(h_), s(static_cast<size_t>(w + 1) * (h + 1), 0.0) {
    for (uint32_t y = 0; y < h; ++y) {
      double row = 0.0;
      for (uint32_t x = 0; x < w; ++x) {
        row += plane[static_cast<size_t>(y) * w + x];
        s[static_cast<size_t>(y + 1) * (w + 1) + (x + 1)] =
            s[static_cast<size_t>(y) * (w + 1) + (x + 1)] + row;
      }
    }
  }
  // sum over [x, x+n) x [y, y+n)
  double box(uint32_t x, uint32_t y, uint32_t n) const {
    const size_t W = w + 1;
    return s[static_cast<size_t>(y + n) * W + (x + n)] - s[static_cast<size_t>(y) * W + (x + n)] -
           s[static_cast<size_t>(y + n) * W + x] + s[static_cast<size_t>(y) * W + x];
  }
};

}  // namespace detail

/// 10*log10(255^2 / MSE) over all channels; +inf when the frames are equal.
inline double psnr(const Frame& a, const Frame& b) {
  detail::require_same_dims(a, b);
  double m = detail::mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

/// Mean local SSIM on luma: 8x8 uniform windows slid one pixel at a time,
/// K1=0.01, K2=0.03, L=255, population moments.
inline double ssim(const Frame& a, const Frame& b) {
  detail::require_same_dims(a, b);
  constexpr uint32_t kWin = 8;
  constexpr double kC1 = (0.01 * 255) * (0.01 * 255);
  constexpr double kC2 = (0.03 * 255) * (0.03 * 255);
  const uint32_t w = a.width(), h = a.height();
  if (w < kWin || h < kWin) raise(Errc::FrameTooSmall, "ssim needs min side >= 8");

  std::vector<double> ya = luma_plane(a), yb = luma_plane(b);
  std::vector<double> yaa(ya.size()), ybb(ya.size()), yab(ya.size());
  for (size_t i = 0; i < ya.size(); ++i) {
    yaa[i] = ya[i] * ya[i];
    ybb[i] = yb[i] * yb[i];
    yab[i] = ya[i] * yb[i];
  }
  detail::Integral ia(ya, w, h), ib(yb, w, h);
  detail::Integral iaa(yaa, w, h), ibb(ybb, w, h), iab(yab, w, h);

  const double n = kWin * kWin;
  double acc = 0.0;
  size_t windows = 0;
  for (uint32_t y = 0; y + kWin <= h; ++y) {
    for (uint32_t x = 0; x + kWin <= w; ++x) {
      double ma = ia.box(x, y, kWin) / n;
      double mb = ib.box(x, y, kWin) / n;
      double va = iaa.box(x, y, kWin) / n - ma * ma;
      double vb = ibb.box(x, y, kWin) / n - mb * mb;
      double cov = iab.box(x, y, kWin) / n - ma * mb;
      double s = ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
                 ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
      acc += s;
      ++windows;
    }
  }
  return acc / static_cast<double>(windows);
}

/// RMSE normalized by the 255 dynamic range.
inline double nrmse(const Frame& a, const Frame& b) {
  detail::require_same_dims(a, b);
  return std::sqrt(detail::mse(a, b)) / 255.0;
}

/// Pearson correlation of the two luma sequences. Errors when both frames
/// are constant; a single constant frame correlates with nothing and yields 0.
inline double ncc(const Frame& a, const Frame& b) {
  detail::require_same_dims(a, b);
  std::vector<double> ya = luma_plane(a), yb = luma_plane(b);
  const size_t n = ya.size();
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += ya[i];
    mb += yb[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double da = ya[i] - ma, db = yb[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 && sbb == 0.0) raise(Errc::ZeroVariance, "both frames are constant");
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

inline double embedding_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    raise(Errc::DimensionMismatch, "embeddings must have equal non-zero length");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) raise(Errc::ZeroVector, "cosine similarity of a zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace mrv
