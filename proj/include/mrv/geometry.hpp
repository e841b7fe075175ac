// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mrv/error.hpp"
#include "mrv/image.hpp"

namespace mrv {

struct Point2 {
  double x = 0.0, y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Correspondence {
  Point2 src;
  Point2 dst;
};

/// 3x3 projective transform. Normalized so m[2][2] == 1 whenever that entry
/// is non-zero; always invertible (|det| > 1e-12).
struct Homography {
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  static Homography identity() { return {}; }
  static Homography translation(double dx, double dy) {
    Homography h;
    h.m[0][2] = dx;
    h.m[1][2] = dy;
    return h;
  }
  static Homography scaling(double sx, double sy) {
    Homography h;
    h.m[0][0] = sx;
    h.m[1][1] = sy;
    return h;
  }
  static Homography rotation_about(double cx, double cy, double radians) {
    double c = std::cos(radians), s = std::sin(radians);
    Homography h;
    h.m = {{{c, -s, cx - c * cx + s * cy}, {s, c, cy - s * cx - c * cy}, {0, 0, 1}}};
    return h;
  }

  double det() const {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  }

  Homography inverse() const {
    double d = det();
    if (std::abs(d) <= 1e-12) raise(Errc::SingularHomography, "homography is not invertible");
    Homography r;
    r.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
    r.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
    r.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
    r.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
    r.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
    r.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
    r.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
    r.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
    r.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
    return r;
  }

  Homography compose(const Homography& rhs) const {
    Homography r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        r.m[i][j] = m[i][0] * rhs.m[0][j] + m[i][1] * rhs.m[1][j] + m[i][2] * rhs.m[2][j];
      }
    return r;
  }
};

inline Point2 project(const Homography& h, const Point2& p) {
  double w = h.m[2][0] * p.x + h.m[2][1] * p.y + h.m[2][2];
  if (std::abs(w) <= 1e-12) raise(Errc::PointAtInfinity, "projected point at infinity");
  return {(h.m[0][0] * p.x + h.m[0][1] * p.y + h.m[0][2]) / w,
          (h.m[1][0] * p.x + h.m[1][1] * p.y + h.m[1][2]) / w};
}

namespace detail {

// Hartley conditioning: translate to the centroid, scale to mean distance
// sqrt(2). Returned as the 3x3 transform that maps raw to conditioned points.
struct Conditioning {
  double scale = 1.0;
  double tx = 0.0, ty = 0.0;
  Point2 apply(const Point2& p) const { return {(p.x - tx) * scale, (p.y - ty) * scale}; }
};

inline Conditioning condition_points(const std::vector<Point2>& pts) {
  Conditioning c;
  for (const auto& p : pts) {
    c.tx += p.x;
    c.ty += p.y;
  }
  c.tx /= static_cast<double>(pts.size());
  c.ty /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += std::hypot(p.x - c.tx, p.y - c.ty);
  mean_dist /= static_cast<double>(pts.size());
  c.scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  return c;
}

inline double triangle_area(const Point2& a, const Point2& b, const Point2& c) {
  return std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)) / 2.0;
}

}  // namespace detail

/// DLT estimate of the homography mapping src to dst points, conditioned per
/// Hartley: the solution is the right singular vector of the smallest
/// singular value of the stacked 2Nx9 system, de-conditioned afterwards.
inline Homography estimate_homography(const std::vector<Correspondence>& pairs) {
  if (pairs.size() < 4)
    raise(Errc::DegenerateConfiguration, "need at least 4 correspondences");

  std::vector<Point2> src(pairs.size()), dst(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    src[i] = pairs[i].src;
    dst[i] = pairs[i].dst;
    if (!std::isfinite(src[i].x) || !std::isfinite(src[i].y) || !std::isfinite(dst[i].x) ||
        !std::isfinite(dst[i].y))
      raise(Errc::DegenerateConfiguration, "non-finite correspondence");
  }
  auto cs = detail::condition_points(src);
  auto cd = detail::condition_points(dst);

  // Minimal sets get an explicit collinearity screen; larger sets are covered
  // by the rank test below.
  if (pairs.size() == 4) {
    for (int drop = 0; drop < 4; ++drop) {
      std::array<Point2, 3> s, d;
      int k = 0;
      for (int i = 0; i < 4; ++i) {
        if (i == drop) continue;
        s[k] = cs.apply(src[i]);
        d[k] = cd.apply(dst[i]);
        ++k;
      }
      if (detail::triangle_area(s[0], s[1], s[2]) < 1e-9 ||
          detail::triangle_area(d[0], d[1], d[2]) < 1e-9)
        raise(Errc::DegenerateConfiguration, "three correspondences are collinear");
    }
  }

  Eigen::MatrixXd A(2 * pairs.size(), 9);
  for (size_t i = 0; i < pairs.size(); ++i) {
    Point2 s = cs.apply(src[i]);
    Point2 d = cd.apply(dst[i]);
    A.row(2 * i) << -s.x, -s.y, -1, 0, 0, 0, d.x * s.x, d.x * s.y, d.x;
    A.row(2 * i + 1) << 0, 0, 0, -s.x, -s.y, -1, d.y * s.x, d.y * s.y, d.y;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // unique solution up to scale needs rank 8
  if (sv.size() < 8 || sv(7) <= 1e-9 * std::max(sv(0), 1.0))
    raise(Errc::DegenerateConfiguration, "rank-deficient correspondence system");
  Eigen::VectorXd hvec = svd.matrixV().col(8);

  // de-condition: H = Td^-1 * Hn * Ts
  Eigen::Matrix3d Hn;
  Hn << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7), hvec(8);
  Eigen::Matrix3d Ts, TdInv;
  Ts << cs.scale, 0, -cs.scale * cs.tx, 0, cs.scale, -cs.scale * cs.ty, 0, 0, 1;
  TdInv << 1.0 / cd.scale, 0, cd.tx, 0, 1.0 / cd.scale, cd.ty, 0, 0, 1;
  Eigen::Matrix3d H = TdInv * Hn * Ts;

  if (std::abs(H(2, 2)) > 1e-12) H /= H(2, 2);
  Homography out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.m[i][j] = H(i, j);
  if (std::abs(out.det()) <= 1e-12)
    raise(Errc::DegenerateConfiguration, "estimated homography is singular");
  return out;
}

/// Inverse-mapping perspective warp: each output pixel samples the input at
/// H^-1 * p, bilinear, out-of-bounds black.
inline Frame warp_frame(const Frame& frame, const Homography& h, uint32_t out_w, uint32_t out_h) {
  Homography inv = h.inverse();  // raises SingularHomography
  Frame out(out_w, out_h);
  const double w_max = frame.width() - 1.0;
  const double h_max = frame.height() - 1.0;
  for (uint32_t y = 0; y < out_h; ++y) {
    for (uint32_t x = 0; x < out_w; ++x) {
      double wp = inv.m[2][0] * x + inv.m[2][1] * y + inv.m[2][2];
      if (std::abs(wp) <= 1e-12) continue;
      double sx = (inv.m[0][0] * x + inv.m[0][1] * y + inv.m[0][2]) / wp;
      double sy = (inv.m[1][0] * x + inv.m[1][1] * y + inv.m[1][2]) / wp;
      // samples within half a pixel of the border clamp onto it; beyond
      // that is out of bounds and stays black
      if (sx < -0.5 || sx > w_max + 0.5 || sy < -0.5 || sy > h_max + 0.5) continue;
      sx = std::clamp(sx, 0.0, w_max);
      sy = std::clamp(sy, 0.0, h_max);
      uint32_t x0 = static_cast<uint32_t>(sx);
      uint32_t y0 = static_cast<uint32_t>(sy);
      uint32_t x1 = std::min(x0 + 1, frame.width() - 1);
      uint32_t y1 = std::min(y0 + 1, frame.height() - 1);
      double fx = sx - x0, fy = sy - y0;
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

/// Nearest-neighbour variant for masks; output stays binary.
inline Mask warp_mask(const Mask& mask, const Homography& h, uint32_t out_w, uint32_t out_h) {
  Homography inv = h.inverse();
  Mask out(out_w, out_h);
  for (uint32_t y = 0; y < out_h; ++y) {
    for (uint32_t x = 0; x < out_w; ++x) {
      double wp = inv.m[2][0] * x + inv.m[2][1] * y + inv.m[2][2];
      if (std::abs(wp) <= 1e-12) continue;
      double sx = (inv.m[0][0] * x + inv.m[0][1] * y + inv.m[0][2]) / wp;
      double sy = (inv.m[1][0] * x + inv.m[1][1] * y + inv.m[1][2]) / wp;
      int64_t xi = static_cast<int64_t>(std::lround(sx));
      int64_t yi = static_cast<int64_t>(std::lround(sy));
      if (xi < 0 || yi < 0 || xi >= mask.width() || yi >= mask.height()) continue;
      out.bits()[static_cast<size_t>(y) * out_w + x] =
          mask.at(static_cast<uint32_t>(xi), static_cast<uint32_t>(yi));
    }
  }
  return out;
}

/// Warps the target frame onto the reference frame's plane using paired
/// tag-plane sample points (same physical points seen in both frames).
inline Frame align_target(const std::vector<Point2>& ref_points,
                          const std::vector<Point2>& tgt_points, const Frame& target,
                          uint32_t out_w, uint32_t out_h) {
  if (ref_points.size() != tgt_points.size() || ref_points.size() < 4)
    raise(Errc::DegenerateConfiguration, "need >= 4 paired alignment points");
  std::vector<Correspondence> pairs(ref_points.size());
  for (size_t i = 0; i < ref_points.size(); ++i) pairs[i] = {tgt_points[i], ref_points[i]};
  return warp_frame(target, estimate_homography(pairs), out_w, out_h);
}

}  // namespace mrv
