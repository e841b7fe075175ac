// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "mrv/codec.hpp"
#include "mrv/dataset.hpp"
#include "mrv/error.hpp"
#include "mrv/geometry.hpp"
#include "mrv/image.hpp"
#include "mrv/segmentation.hpp"
#include "mrv/verification.hpp"

namespace mrv {

enum class Method { Iou, Psnr, Ssim, Nrmse, Ncc, Cosine };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::Iou: return "iou";
    case Method::Psnr: return "psnr";
    case Method::Ssim: return "ssim";
    case Method::Nrmse: return "nrmse";
    case Method::Ncc: return "ncc";
    case Method::Cosine: return "cosine";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  for (Method m : {Method::Iou, Method::Psnr, Method::Ssim, Method::Nrmse, Method::Ncc,
                   Method::Cosine})
    if (s == method_name(m)) return m;
  raise(Errc::ConfigInvalid, "unknown method '" + s + "'");
}

/// Classifier-embedding provider for the cosine baseline.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(const Frame& frame) = 0;
};

/// Test stub: normalized 32-bin luma histogram. Stands in for an external
/// classification model's logit vector.
class HistogramEmbedder : public Embedder {
 public:
  std::vector<double> embed(const Frame& frame) override {
    std::vector<double> h(32, 0.0);
    const uint8_t* p = frame.pixels().data();
    const size_t n = static_cast<size_t>(frame.width()) * frame.height();
    for (size_t i = 0; i < n; ++i, p += 3) {
      h[static_cast<size_t>(luma(p)) / 8] += 1.0;
    }
    for (auto& v : h) v /= static_cast<double>(n);
    return h;
  }
};

/// Shells out to a user-provided process: `cmd {frame} {out}` must write a
/// JSON array of numbers to the {out} path.
class ExternalEmbedder : public Embedder {
 public:
  ExternalEmbedder(std::string command_template, std::filesystem::path work_dir)
      : command_(std::move(command_template)), work_dir_(std::move(work_dir)) {
    std::filesystem::create_directories(work_dir_);
  }

  std::vector<double> embed(const Frame& frame) override {
    std::lock_guard<std::mutex> lock(mu_);
    auto dir = work_dir_ / ("embed_" + std::to_string(counter_++));
    std::filesystem::create_directories(dir);
    auto frame_path = dir / "frame.png";
    auto out_path = dir / "embedding.json";
    std::vector<double> out;
    try {
      save_frame_png(frame_path, frame);
      std::string cmd = command_;
      auto replace_all = [](std::string& s, const std::string& from, const std::string& to) {
        for (size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
          s.replace(pos, from.size(), to);
      };
      replace_all(cmd, "{frame}", frame_path.string());
      replace_all(cmd, "{out}", out_path.string());
      if (std::system(cmd.c_str()) != 0)
        raise(Errc::SegmenterFailure, "embedding command failed");
      auto raw = read_file(out_path);
      nlohmann::json j = nlohmann::json::parse(raw.begin(), raw.end());
      for (const auto& v : j) out.push_back(v.get<double>());
    } catch (const Error&) {
      std::filesystem::remove_all(dir);
      throw;
    } catch (const std::exception& e) {
      std::filesystem::remove_all(dir);
      raise(Errc::SegmenterFailure, std::string("embedding adapter fault: ") + e.what());
    }
    std::filesystem::remove_all(dir);
    return out;
  }

 private:
  std::string command_;
  std::filesystem::path work_dir_;
  std::mutex mu_;
  uint64_t counter_ = 0;
};

/// Transport- and evaluation-path settings shared by the offline scorer, the
/// client simulator and the benchmarks.
struct PipelineOptions {
  double alpha = 1.0;
  CodecSpec codec = CodecSpec::lossless();
  bool codec_roundtrip = false;  // mirror the wire's encode+decode offline
  Region crop{};                 // zero-size = full frame
  VerificationPolicy policy{0.5};
};

struct PreparedFrame {
  Frame frame;
  std::vector<Point2> points;  // alignment points in sent-frame coordinates
};

/// Client-side preprocessing: crop, scale by alpha, and map tag-plane points
/// into the coordinates of the frame that actually travels.
inline PreparedFrame preprocess(const Frame& in, const Region& crop_region, double alpha,
                                const std::vector<Point2>& points) {
  Region r = (crop_region.w && crop_region.h) ? crop_region : Region::full(in);
  Frame cropped = crop(in, r);
  Frame scaled = scale(cropped, alpha);
  PreparedFrame out;
  const double sx = static_cast<double>(scaled.width()) / cropped.width();
  const double sy = static_cast<double>(scaled.height()) / cropped.height();
  out.points.reserve(points.size());
  for (const auto& p : points) {
    out.points.push_back({(p.x - r.x + 0.5) * sx - 0.5, (p.y - r.y + 0.5) * sy - 0.5});
  }
  out.frame = std::move(scaled);
  return out;
}

/// Server-side alignment: warp the received target onto the reference plane
/// via the tag-plane point pairs. Without usable points the target must
/// already be in reference geometry.
inline Frame align_received_target(const Frame& target, const std::vector<Point2>& tgt_points,
                                   const std::vector<Point2>& ref_points, uint32_t ref_w,
                                   uint32_t ref_h) {
  if (ref_points.size() >= 4 && tgt_points.size() == ref_points.size())
    return align_target(ref_points, tgt_points, target, ref_w, ref_h);
  if (target.width() != ref_w || target.height() != ref_h)
    raise(Errc::DimensionMismatch, "unaligned target dimensions differ from reference");
  return target;
}

/// The verification core shared verbatim by the edge server and the offline
/// evaluator: filter the virtual layer, segment the aligned target, pick the
/// max-IoU candidate, apply the threshold.
inline VerificationDecision verify_frames(const Frame& reference_virtual,
                                          const Frame& aligned_target, Segmenter& segmenter,
                                          SegmentQuery query, const VerificationPolicy& policy) {
  Mask ref_mask = extract_reference_mask(reference_virtual);
  query.out_w = reference_virtual.width();
  query.out_h = reference_virtual.height();
  SegmentationOutput candidates = segmenter.segment(aligned_target, query);
  return verify(ref_mask, candidates, policy);
}

struct SampleResult {
  std::string id;
  uint32_t step_index = 0;
  int step_class = 0;
  bool ground_truth = false;
  double score = 0.0;
  VerificationDecision decision;  // populated by the iou method
  size_t ref_bytes = 0, tgt_bytes = 0;
  double encode_ms = 0.0, decode_ms = 0.0, postproc_ms = 0.0;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Scores one manifest sample offline, mirroring exactly what the networked
/// path computes for the same options.
inline SampleResult score_sample(const DatasetManifest& manifest, const SampleRef& sample,
                                 Segmenter* segmenter, Embedder* embedder, Method method,
                                 const PipelineOptions& opts) {
  SampleResult out;
  out.id = sample.id;
  out.step_index = sample.step_index;
  out.step_class = sample.step_class;
  out.ground_truth = sample.ground_truth;

  // the mask policy uploads the virtual layer as its reference; similarity
  // baselines compare the visual reference frame instead
  Frame ref_raw = load_frame(
      manifest.resolve(method == Method::Iou ? sample.virtual_layer : sample.reference));
  Frame tgt_raw = load_frame(manifest.resolve(sample.target));

  PreparedFrame ref = preprocess(ref_raw, opts.crop, opts.alpha, sample.alignment_points);
  PreparedFrame tgt = preprocess(tgt_raw, opts.crop, opts.alpha, sample.alignment_points);

  if (opts.codec_roundtrip) {
    auto t0 = std::chrono::steady_clock::now();
    auto ref_bytes = encode(ref.frame, opts.codec);
    auto tgt_bytes = encode(tgt.frame, opts.codec);
    out.encode_ms = detail::ms_since(t0);
    out.ref_bytes = ref_bytes.size();
    out.tgt_bytes = tgt_bytes.size();
    t0 = std::chrono::steady_clock::now();
    ref.frame = decode(ref_bytes);
    tgt.frame = decode(tgt_bytes);
    out.decode_ms = detail::ms_since(t0);
  }

  auto t0 = std::chrono::steady_clock::now();
  Frame aligned = align_received_target(tgt.frame, tgt.points, ref.points, ref.frame.width(),
                                        ref.frame.height());
  switch (method) {
    case Method::Iou: {
      if (!segmenter) raise(Errc::ConfigInvalid, "iou method needs a segmenter");
      SegmentQuery q;
      q.frame_key = sample.source_id;
      q.step_class = sample.step_class;
      q.crop = opts.crop;
      out.decision = verify_frames(ref.frame, aligned, *segmenter, q, opts.policy);
      out.score = out.decision.iou;
      break;
    }
    case Method::Psnr:
      out.score = psnr(ref.frame, aligned);
      break;
    case Method::Ssim:
      out.score = ssim(ref.frame, aligned);
      break;
    case Method::Nrmse:
      // negated so that "higher score = more similar" holds for every method
      out.score = -nrmse(ref.frame, aligned);
      break;
    case Method::Ncc:
      out.score = ncc(ref.frame, aligned);
      break;
    case Method::Cosine: {
      if (!embedder) raise(Errc::ConfigInvalid, "cosine method needs an embedder");
      out.score = embedding_cosine(embedder->embed(ref.frame), embedder->embed(aligned));
      break;
    }
  }
  out.postproc_ms = detail::ms_since(t0);
  if (method != Method::Iou) {
    out.decision.pass = out.score > opts.policy.threshold;
    out.decision.iou = 0.0;
  }
  return out;
}

/// Evaluates every sample of a manifest, optionally in parallel. Results are
/// ordered by sample index regardless of worker scheduling.
inline std::vector<SampleResult> evaluate_manifest(const DatasetManifest& manifest,
                                                   Segmenter* segmenter, Embedder* embedder,
                                                   Method method, const PipelineOptions& opts,
                                                   int jobs = 0) {
  const size_t n = manifest.samples.size();
  std::vector<SampleResult> results(n);
  if (n == 0) return results;
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs)
                              : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));

  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mu;
  auto worker = [&]() {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        results[i] =
            score_sample(manifest, manifest.samples[i], segmenter, embedder, method, opts);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) raise(Errc::IoFailure, "evaluation failed: " + first_error);
  return results;
}

}  // namespace mrv
