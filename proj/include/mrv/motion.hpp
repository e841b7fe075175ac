// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "mrv/error.hpp"
#include "mrv/image.hpp"

namespace mrv {

struct Hsv {
  double h = 0.0;  // degrees [0,360)
  double s = 0.0;  // [0,1]
  double v = 0.0;  // [0,1]
};

inline std::array<uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  h = std::fmod(std::fmod(h, 360.0) + 360.0, 360.0);
  double c = v * s;
  double x = c * (1.0 - std::abs(std::fmod(h / 60.0, 2.0) - 1.0));
  double m = v - c;
  double r = 0, g = 0, b = 0;
  if (h < 60) { r = c; g = x; }
  else if (h < 120) { r = x; g = c; }
  else if (h < 180) { g = c; b = x; }
  else if (h < 240) { g = x; b = c; }
  else if (h < 300) { r = x; b = c; }
  else { r = c; b = x; }
  auto q = [&](double ch) { return static_cast<uint8_t>(std::lround((ch + m) * 255.0)); };
  return {q(r), q(g), q(b)};
}

inline Hsv rgb_to_hsv(uint8_t r8, uint8_t g8, uint8_t b8) {
  double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  double d = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? d / mx : 0.0;
  if (d > 0.0) {
    if (mx == r)
      out.h = 60.0 * std::fmod((g - b) / d, 6.0);
    else if (mx == g)
      out.h = 60.0 * ((b - r) / d + 2.0);
    else
      out.h = 60.0 * ((r - g) / d + 4.0);
    if (out.h < 0.0) out.h += 360.0;
  }
  return out;
}

/// HSV box classifier for skin pixels. The hue interval may wrap through 0
/// (lo > hi means [lo,360) U [0,hi]).
struct SkinModel {
  double hue_lo = 0.0, hue_hi = 50.0;       // degrees
  double sat_lo = 0.23, sat_hi = 0.68;
  double val_lo = 0.35, val_hi = 1.0;

  bool contains(const Hsv& c) const {
    bool hue_ok = hue_lo <= hue_hi ? (c.h >= hue_lo && c.h <= hue_hi)
                                   : (c.h >= hue_lo || c.h <= hue_hi);
    return hue_ok && c.s >= sat_lo && c.s <= sat_hi && c.v >= val_lo && c.v <= val_hi;
  }
};

struct MotionConfig {
  double base_threshold = 0.05;   // fraction of pixels
  uint32_t capture_period_ms = 100;
  double reference_distance = 1.0;
  double min_threshold = 0.01;
  double max_threshold = 0.5;
};

/// Fraction of pixels falling inside the skin model's HSV box.
inline double skin_proportion(const Frame& frame, const SkinModel& model) {
  const uint8_t* p = frame.pixels().data();
  const size_t n = static_cast<size_t>(frame.width()) * frame.height();
  size_t hits = 0;
  for (size_t i = 0; i < n; ++i, p += 3) {
    if (model.contains(rgb_to_hsv(p[0], p[1], p[2]))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

/// Distance-adaptive hand threshold. A hand farther from the tag covers
/// fewer pixels, roughly with the square of the distance ratio; the result
/// is clamped into [min_threshold, max_threshold].
inline double effective_threshold(const MotionConfig& config, double tag_distance) {
  if (!(tag_distance > 0.0)) raise(Errc::InvalidDistance, "tag distance must be positive");
  double ratio = config.reference_distance / tag_distance;
  double t = config.base_threshold * ratio * ratio;
  return std::clamp(t, config.min_threshold, config.max_threshold);
}

enum class Stage : uint8_t { Idle, Busy };

enum class MotionEvent : uint8_t { None, CaptureReference, CaptureTarget };

/// Two-stage user model: hands in view = busy, hands gone = idle. A target
/// frame is captured on the busy-to-idle transition; a reference frame is
/// captured on an idle step once fresh guidance is on screen. Captures
/// strictly alternate reference, target, reference, ...
class MotionDetector {
 public:
  enum class Phase : uint8_t {
    NeedReference,     // guidance displayed, reference not yet captured
    Armed,             // reference captured, waiting for the user's operation
    AwaitingFeedback,  // target sent, waiting for the server verdict
  };

  Stage stage() const { return stage_; }
  Phase phase() const { return phase_; }
  bool awaiting_feedback() const { return phase_ == Phase::AwaitingFeedback; }

  /// One capture-period tick. At most one event per call.
  MotionEvent step(const Frame& frame, const SkinModel& model, double threshold) {
    return step_with_proportion(skin_proportion(frame, model), threshold);
  }

  /// Same transition logic with a precomputed skin proportion (lets scripted
  /// simulations drive the FSM without synthesizing frames).
  MotionEvent step_with_proportion(double proportion, double threshold) {
    bool hand = proportion > threshold;
    if (stage_ == Stage::Idle && hand) {
      stage_ = Stage::Busy;
      return MotionEvent::None;
    }
    if (stage_ == Stage::Busy && !hand) {
      stage_ = Stage::Idle;
      if (phase_ == Phase::Armed) {
        phase_ = Phase::AwaitingFeedback;
        return MotionEvent::CaptureTarget;
      }
      return MotionEvent::None;
    }
    if (stage_ == Stage::Idle && !hand && phase_ == Phase::NeedReference) {
      phase_ = Phase::Armed;
      return MotionEvent::CaptureReference;
    }
    return MotionEvent::None;
  }

  /// Server feedback arrived and the displayed guidance was refreshed; the
  /// next idle step captures a new reference.
  void acknowledge_feedback() {
    if (phase_ != Phase::AwaitingFeedback)
      raise(Errc::NotAwaiting, "acknowledge_feedback called while not awaiting feedback");
    phase_ = Phase::NeedReference;
  }

 private:
  Stage stage_ = Stage::Idle;
  Phase phase_ = Phase::NeedReference;
};

}  // namespace mrv
