// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrv/codec.hpp"
#include "mrv/error.hpp"
#include "mrv/image.hpp"
#include "mrv/morphology.hpp"
#include "mrv/rng.hpp"
#include "mrv/verification.hpp"

namespace mrv {

/// One ground-truth object annotation: class, mask and the tight bounding
/// box of the mask's set bits.
struct InstanceLabel {
  int class_id = 0;
  Mask mask;
  Region bbox;
};

inline InstanceLabel make_instance(int class_id, Mask mask) {
  uint32_t x0 = mask.width(), y0 = mask.height(), x1 = 0, y1 = 0;
  bool any = false;
  for (uint32_t y = 0; y < mask.height(); ++y)
    for (uint32_t x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      any = true;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  if (!any) raise(Errc::EmptyReferenceMask, "instance mask has no set bits");
  return InstanceLabel{class_id, std::move(mask), Region{x0, y0, x1 - x0 + 1, y1 - y0 + 1}};
}

/// Deterministic degradation model standing in for an imperfect segmentation
/// model: dilation/erosion, translation jitter, dropped and spurious
/// detections, all driven by (seed, instance_index).
struct PerturbationSpec {
  int dilate_erode_radius = 0;  // >0 dilates, <0 erodes
  double jitter_sigma = 0.0;    // pixels
  double miss_rate = 0.0;
  double spurious_rate = 0.0;
  uint64_t seed = 0;

  bool is_identity() const {
    return dilate_erode_radius == 0 && jitter_sigma == 0.0 && miss_rate == 0.0 &&
           spurious_rate == 0.0;
  }
};

/// Applies the degradation to one label mask. Absent result = missed
/// detection. Bit-identical for a fixed (spec.seed, instance_index).
inline std::optional<Mask> perturb(const Mask& label_mask, const PerturbationSpec& spec,
                                   uint64_t instance_index) {
  Rng rng(derive_seed(spec.seed, instance_index, 0x7065727475726221ull));
  if (rng.chance(spec.miss_rate)) return std::nullopt;
  Mask out = dilate_or_erode(label_mask, spec.dilate_erode_radius);
  int dx = static_cast<int>(std::lround(rng.normal(0.0, spec.jitter_sigma)));
  int dy = static_cast<int>(std::lround(rng.normal(0.0, spec.jitter_sigma)));
  if (dx != 0 || dy != 0) out = translate(out, dx, dy);
  return out;
}

/// Geometry of the query frame relative to the annotated source image:
/// ground-truth masks are cropped and rescaled into the frame the segmenter
/// actually sees. A zero-size crop means the full source image.
struct SegmentQuery {
  std::string frame_key;
  int step_class = 0;
  Region crop{};          // in source-image coordinates
  uint32_t out_w = 0, out_h = 0;  // 0 = source dimensions
};

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  /// Returns candidates of query.step_class only; empty output is a valid
  /// "object absent" answer.
  virtual SegmentationOutput segment(const Frame& frame, const SegmentQuery& query) = 0;
};

using LabelStore = std::map<std::string, std::vector<InstanceLabel>>;

/// Ground-truth-backed segmenter: looks candidates up by dataset key and
/// degrades them per the perturbation spec. Confidence is 1.0 by
/// construction; the verification policy never reads it.
class OracleSegmenter : public Segmenter {
 public:
  OracleSegmenter(LabelStore labels, PerturbationSpec spec)
      : labels_(std::move(labels)), spec_(spec) {}

  SegmentationOutput segment(const Frame& frame, const SegmentQuery& q) override {
    auto it = labels_.find(q.frame_key);
    if (it == labels_.end()) raise(Errc::UnknownFrame, "no labels for key '" + q.frame_key + "'");

    SegmentationOutput out;
    const uint64_t key_hash = fnv1a64(q.frame_key);
    Mask first_transformed;
    for (size_t i = 0; i < it->second.size(); ++i) {
      const InstanceLabel& label = it->second[i];
      if (label.class_id != q.step_class) continue;
      Mask m = transform_to_query(label.mask, q);
      if (first_transformed.width() == 0) first_transformed = m;
      // per-instance stream: stable across runs and across offline/online
      uint64_t stream = key_hash * 1000003ull + i;
      auto perturbed = perturb(m, spec_, stream);
      if (!perturbed || perturbed->empty()) continue;
      out.candidates.push_back({q.step_class, std::move(*perturbed), 1.0});
    }
    if (spec_.spurious_rate > 0.0 && first_transformed.width() > 0) {
      Rng rng(derive_seed(spec_.seed, key_hash, 0x73707572ull));
      if (rng.chance(spec_.spurious_rate)) {
        // a same-class false positive parked well away from the true object
        int dx = static_cast<int>(rng.range(first_transformed.width() / 4,
                                            first_transformed.width() / 2)) *
                 (rng.chance(0.5) ? 1 : -1);
        int dy = static_cast<int>(rng.range(first_transformed.height() / 4,
                                            first_transformed.height() / 2)) *
                 (rng.chance(0.5) ? 1 : -1);
        Mask spur = translate(first_transformed, dx, dy);
        if (!spur.empty()) out.candidates.push_back({q.step_class, std::move(spur), 1.0});
      }
    }
    (void)frame;  // the oracle answers from ground truth, not pixels
    return out;
  }

  const LabelStore& labels() const { return labels_; }

 private:
  static Mask transform_to_query(const Mask& source_mask, const SegmentQuery& q) {
    Mask m = source_mask;
    if (q.crop.w != 0 && q.crop.h != 0) m = crop(m, q.crop);
    uint32_t ow = q.out_w ? q.out_w : m.width();
    uint32_t oh = q.out_h ? q.out_h : m.height();
    if (ow != m.width() || oh != m.height()) m = scale_mask_to(m, ow, oh);
    return m;
  }

  LabelStore labels_;
  PerturbationSpec spec_;
};

/// Binary-filters the rendered virtual layer into the reference mask.
/// An empty result signals a rendering or step-configuration fault upstream.
inline Mask extract_reference_mask(const Frame& virtual_layer) {
  Mask m = binary_filter(virtual_layer);
  if (m.empty()) raise(Errc::EmptyReferenceMask, "virtual layer rendered no pixels");
  return m;
}

/// Adapter for a user-provided segmentation process. Exchange format:
/// the command receives the query frame as a PNG path and an output
/// directory; it must write <out>/index.json listing candidates as
/// {"candidates":[{"class_id":N,"confidence":F,"file":"mask.png"},...]}
/// with each mask a single-channel 0/255 PNG of the frame's dimensions.
///
/// The command template uses {frame} and {out} placeholders. Access to the
/// subprocess is serialized; the adapter is safe to share across threads.
class ExternalSegmenter : public Segmenter {
 public:
  ExternalSegmenter(std::string command_template, std::filesystem::path work_dir)
      : command_(std::move(command_template)), work_dir_(std::move(work_dir)) {
    std::filesystem::create_directories(work_dir_);
  }

  SegmentationOutput segment(const Frame& frame, const SegmentQuery& q) override {
    std::lock_guard<std::mutex> lock(mu_);
    auto dir = work_dir_ / ("query_" + std::to_string(counter_++));
    std::filesystem::create_directories(dir);
    auto frame_path = dir / "frame.png";
    auto out_dir = dir / "out";
    std::filesystem::create_directories(out_dir);
    SegmentationOutput result;
    try {
      save_frame_png(frame_path, frame);
      std::string cmd = substitute(command_, frame_path.string(), out_dir.string());
      int rc = std::system(cmd.c_str());
      if (rc != 0) raise(Errc::SegmenterFailure, "adapter command failed with status " +
                                                      std::to_string(rc));
      result = read_index(out_dir, frame, q);
    } catch (const Error& e) {
      std::filesystem::remove_all(dir);
      if (e.code() == Errc::SegmenterFailure) throw;
      raise(Errc::SegmenterFailure, std::string("adapter fault: ") + e.what());
    } catch (const std::exception& e) {
      std::filesystem::remove_all(dir);
      raise(Errc::SegmenterFailure, std::string("adapter fault: ") + e.what());
    }
    std::filesystem::remove_all(dir);
    return result;
  }

 private:
  static std::string substitute(std::string tmpl, const std::string& frame,
                                const std::string& out) {
    auto replace_all = [](std::string& s, const std::string& from, const std::string& to) {
      for (size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
        s.replace(pos, from.size(), to);
    };
    replace_all(tmpl, "{frame}", frame);
    replace_all(tmpl, "{out}", out);
    return tmpl;
  }

  static SegmentationOutput read_index(const std::filesystem::path& out_dir, const Frame& frame,
                                       const SegmentQuery& q) {
    auto index_path = out_dir / "index.json";
    if (!std::filesystem::exists(index_path))
      raise(Errc::SegmenterFailure, "adapter produced no index.json");
    auto raw = read_file(index_path);
    nlohmann::json idx = nlohmann::json::parse(raw.begin(), raw.end());
    SegmentationOutput out;
    for (const auto& c : idx.at("candidates")) {
      int class_id = c.at("class_id").get<int>();
      if (class_id != q.step_class) continue;
      Mask m = load_mask(out_dir / c.at("file").get<std::string>());
      if (m.width() != frame.width() || m.height() != frame.height())
        raise(Errc::SegmenterFailure, "adapter mask dimensions differ from the query frame");
      out.candidates.push_back({class_id, std::move(m), c.value("confidence", 1.0)});
    }
    return out;
  }

  std::string command_;
  std::filesystem::path work_dir_;
  std::mutex mu_;
  uint64_t counter_ = 0;
};

}  // namespace mrv
