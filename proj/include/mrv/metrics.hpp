// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "mrv/error.hpp"

namespace mrv {

struct ConfusionCounts {
  uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
  uint64_t total() const { return tp + fn + fp + tn; }
};

struct Rates {
  double ppv = 0.0, tpr = 0.0, fpr = 0.0, acc = 0.0;
};

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0, tpr = 0.0, acc = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by threshold ascending
};

/// Detection rule everywhere: positive iff score strictly exceeds threshold.
inline ConfusionCounts confusion(const std::vector<double>& scores,
                                 const std::vector<bool>& truths, double threshold) {
  if (scores.size() != truths.size())
    raise(Errc::LengthMismatch, "scores and truths must have equal length");
  if (scores.empty()) raise(Errc::EmptyInput, "no samples");
  ConfusionCounts c;
  for (size_t i = 0; i < scores.size(); ++i) {
    bool detected = scores[i] > threshold;
    if (truths[i])
      detected ? ++c.tp : ++c.fn;
    else
      detected ? ++c.fp : ++c.tn;
  }
  return c;
}

inline Rates rates(const ConfusionCounts& c) {
  if (c.tp + c.fp == 0) raise(Errc::UndefinedRate, "ppv undefined: no positive detections");
  if (c.tp + c.fn == 0) raise(Errc::UndefinedRate, "tpr undefined: no positive events");
  if (c.fp + c.tn == 0) raise(Errc::UndefinedRate, "fpr undefined: no negative events");
  if (c.total() == 0) raise(Errc::UndefinedRate, "acc undefined: no samples");
  Rates r;
  r.ppv = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  r.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  r.fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  r.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  return r;
}

namespace detail {

// tpr/fpr/acc for one threshold without the rates() preconditions; sweeps
// must tolerate degenerate thresholds where a class has no detections.
inline RocPoint roc_point(const std::vector<double>& scores, const std::vector<bool>& truths,
                          double threshold) {
  ConfusionCounts c = confusion(scores, truths, threshold);
  RocPoint p;
  p.threshold = threshold;
  p.tpr = (c.tp + c.fn) ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
  p.fpr = (c.fp + c.tn) ? static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn) : 0.0;
  p.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  return p;
}

}  // namespace detail

/// Default sweep grid: 1001 evenly spaced thresholds over the observed score
/// range, every midpoint between adjacent distinct scores (this makes the
/// trapezoidal AUC match the pairwise-ranking AUC exactly), and endpoints
/// just outside the range. Non-finite scores are ignored for grid placement.
inline std::vector<double> default_grid(const std::vector<double>& scores) {
  if (scores.empty()) raise(Errc::EmptyInput, "no scores");
  std::vector<double> finite;
  finite.reserve(scores.size());
  for (double s : scores)
    if (std::isfinite(s)) finite.push_back(s);
  if (finite.empty()) finite.push_back(0.0);
  std::sort(finite.begin(), finite.end());
  finite.erase(std::unique(finite.begin(), finite.end()), finite.end());

  double lo = finite.front(), hi = finite.back();
  double eps = std::max(1e-9, (hi - lo) * 1e-6);

  std::set<double> grid;
  grid.insert(lo - eps);
  grid.insert(hi + eps);
  for (size_t i = 0; i + 1 < finite.size(); ++i) grid.insert((finite[i] + finite[i + 1]) / 2.0);
  for (int i = 0; i <= 1000; ++i) grid.insert(lo + (hi - lo) * i / 1000.0);
  return {grid.begin(), grid.end()};
}

inline RocCurve sweep(const std::vector<double>& scores, const std::vector<bool>& truths,
                      const std::vector<double>& grid) {
  if (grid.empty()) raise(Errc::EmptyInput, "empty threshold grid");
  RocCurve curve;
  curve.points.reserve(grid.size());
  for (double t : grid) curve.points.push_back(detail::roc_point(scores, truths, t));
  return curve;
}

inline RocCurve sweep(const std::vector<double>& scores, const std::vector<bool>& truths) {
  return sweep(scores, truths, default_grid(scores));
}

/// Trapezoidal area under tpr over fpr, with (0,0) and (1,1) appended.
inline double auc(const RocCurve& curve) {
  if (curve.points.size() < 2) raise(Errc::TooFewPoints, "auc needs at least 2 curve points");
  std::vector<std::pair<double, double>> pts;  // (fpr, tpr)
  pts.reserve(curve.points.size() + 2);
  pts.emplace_back(0.0, 0.0);
  pts.emplace_back(1.0, 1.0);
  for (const auto& p : curve.points) pts.emplace_back(p.fpr, p.tpr);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    area += (pts[i + 1].first - pts[i].first) * (pts[i + 1].second + pts[i].second) / 2.0;
  }
  return area;
}

/// Threshold with the highest accuracy; ties resolve to the smaller one.
inline std::pair<double, double> best_threshold(const RocCurve& curve) {
  if (curve.points.empty()) raise(Errc::EmptyInput, "empty curve");
  const RocPoint* best = &curve.points.front();
  for (const auto& p : curve.points) {
    if (p.acc > best->acc) best = &p;
  }
  return {best->threshold, best->acc};
}

}  // namespace mrv
