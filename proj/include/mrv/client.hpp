// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrv/codec.hpp"
#include "mrv/dataset.hpp"
#include "mrv/log.hpp"
#include "mrv/motion.hpp"
#include "mrv/pipeline.hpp"
#include "mrv/protocol.hpp"

namespace mrv {

struct ClientConfig {
  std::string host = "127.0.0.1";
  uint16_t port = 0;
  double alpha = 0.5;
  CodecSpec codec = CodecSpec::lossless();
  Region crop{};
  int timeout_ms = 5000;
  uint32_t model_id = 1;
  bool fsm_mode = false;      // drive captures through the motion detector
  uint64_t fsm_seed = 1;      // hand-presence script randomness
  double warp_jitter = 0.0;   // synthetic camera motion (radians); 0 = off
};

/// Per-step latency decomposition plus the server's verdict. Wall-clock
/// fields are measurement, never part of any determinism contract.
struct StepRecord {
  std::string sample_id;
  uint32_t step_index = 0;
  bool ground_truth = false;
  bool pass = false;
  uint32_t iou_micro = 0;
  uint32_t next_step = 0;
  size_t ref_bytes = 0, tgt_bytes = 0;
  double preproc_ms = 0, encode_ms = 0, comm_ms = 0, decode_ms = 0, postproc_ms = 0;
  double end_to_end_ms = 0;
};

struct SessionLog {
  std::vector<StepRecord> records;
  bool completed = false;
  std::string error;  // set when the session ended early
};

namespace detail {

inline uint8_t codec_to_wire(const CodecSpec& c) {
  return c.is_lossless() ? 0 : static_cast<uint8_t>(c.quality);
}

inline std::vector<std::pair<float, float>> to_wire_points(const std::vector<Point2>& pts) {
  std::vector<std::pair<float, float>> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.emplace_back(static_cast<float>(p.x), static_cast<float>(p.y));
  return out;
}

}  // namespace detail

/// Replays a dataset manifest against a live edge server: crop, scale,
/// encode, upload each pair, await the verdict, and record the full latency
/// decomposition. End-to-end time runs from the start of preprocessing (the
/// simulated capture instant) until StepControl lands.
inline SessionLog run_client_session(const DatasetManifest& manifest, const ClientConfig& cfg) {
  using clock = std::chrono::steady_clock;
  auto ms_between = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };

  SessionLog log;
  std::optional<TcpStream> conn;
  try {
    conn = TcpStream::connect(cfg.host, cfg.port);
    conn->set_recv_timeout_ms(cfg.timeout_ms);
  } catch (const Error& e) {
    log.error = e.what();
    return log;
  }

  Rng warp_rng(derive_seed(cfg.fsm_seed, 0x77617270ull));
  try {
    for (uint32_t i = 0; i < manifest.samples.size(); ++i) {
      const SampleRef& sample = manifest.samples[i];
      Frame virt_raw = load_frame(manifest.resolve(sample.virtual_layer));
      Frame tgt_raw = load_frame(manifest.resolve(sample.target));

      // optional synthetic user motion: the target frame is observed from a
      // jittered pose and the tag-plane points move with it
      std::vector<Point2> tgt_points_raw = sample.alignment_points;
      if (cfg.warp_jitter > 0.0) {
        Homography pose = Homography::rotation_about(tgt_raw.width() / 2.0,
                                                     tgt_raw.height() / 2.0,
                                                     warp_rng.uniform(-cfg.warp_jitter,
                                                                      cfg.warp_jitter))
                              .compose(Homography::translation(warp_rng.uniform(-3, 3),
                                                               warp_rng.uniform(-3, 3)));
        tgt_raw = warp_frame(tgt_raw, pose, tgt_raw.width(), tgt_raw.height());
        for (auto& p : tgt_points_raw) p = project(pose, p);
      }

      auto t_capture = clock::now();
      PreparedFrame ref = preprocess(virt_raw, cfg.crop, cfg.alpha, sample.alignment_points);
      PreparedFrame tgt = preprocess(tgt_raw, cfg.crop, cfg.alpha, tgt_points_raw);
      auto t_preproc = clock::now();

      auto ref_bytes = encode(ref.frame, cfg.codec);
      auto tgt_bytes = encode(tgt.frame, cfg.codec);
      auto t_encode = clock::now();

      send_message(*conn, SessionInitMsg{cfg.model_id, i, uint32_t(sample.step_class)});
      ReferenceFrameMsg rmsg;
      rmsg.alpha_milli = static_cast<uint16_t>(std::lround(cfg.alpha * 1000.0));
      rmsg.codec = detail::codec_to_wire(cfg.codec);
      rmsg.alignment_points = detail::to_wire_points(ref.points);
      rmsg.payload = std::move(ref_bytes);
      size_t ref_payload_size = rmsg.payload.size();
      send_message(*conn, rmsg);
      TargetFrameMsg tmsg;
      tmsg.alignment_points = detail::to_wire_points(tgt.points);
      tmsg.payload = std::move(tgt_bytes);
      size_t tgt_payload_size = tmsg.payload.size();
      send_message(*conn, tmsg);

      WireMessage reply = recv_message(*conn);
      if (const auto* err = std::get_if<ErrorMsg>(&reply)) {
        if (err->code == uint16_t(WireErrorCode::SegmenterFault)) {
          log_warn("segmenter fault on " + sample.id + ": " + err->message);
          continue;  // session stays alive per protocol
        }
        raise(Errc::ConnectionLost, "server error: " + err->message);
      }
      const auto* result = std::get_if<VerifyResultMsg>(&reply);
      if (!result) raise(Errc::OutOfOrder, "expected VerifyResult");
      WireMessage ctrl = recv_message(*conn);
      const auto* step = std::get_if<StepControlMsg>(&ctrl);
      if (!step) raise(Errc::OutOfOrder, "expected StepControl");
      auto t_reply = clock::now();

      StepRecord rec;
      rec.sample_id = sample.id;
      rec.step_index = i;
      rec.ground_truth = sample.ground_truth;
      rec.pass = result->pass != 0;
      rec.iou_micro = result->iou_micro;
      rec.next_step = step->next_step;
      rec.ref_bytes = ref_payload_size;
      rec.tgt_bytes = tgt_payload_size;
      rec.preproc_ms = ms_between(t_capture, t_preproc);
      rec.encode_ms = ms_between(t_preproc, t_encode);
      rec.decode_ms = result->server_decode_us / 1000.0;
      rec.postproc_ms = result->server_postproc_us / 1000.0;
      rec.comm_ms = std::max(0.0, ms_between(t_encode, t_reply) - rec.decode_ms - rec.postproc_ms);
      rec.end_to_end_ms = ms_between(t_capture, t_reply);
      log.records.push_back(std::move(rec));
    }
    log.completed = true;
  } catch (const Error& e) {
    log.error = e.what();  // partial log flushed up to the failure
  }
  return log;
}

/// Motion-FSM-driven variant: each sample becomes a scripted hand-presence
/// sequence; captures fire only where the idle/busy machine says so, then
/// the captured frames travel exactly like the dataset-driven path.
inline SessionLog run_fsm_session(const DatasetManifest& manifest, const ClientConfig& cfg,
                                  const SkinModel& skin, const MotionConfig& motion) {
  SessionLog log;
  std::optional<TcpStream> conn;
  try {
    conn = TcpStream::connect(cfg.host, cfg.port);
    conn->set_recv_timeout_ms(cfg.timeout_ms);
  } catch (const Error& e) {
    log.error = e.what();
    return log;
  }

  MotionDetector detector;
  Rng rng(cfg.fsm_seed);
  const double threshold = motion.base_threshold;

  // tiny synthetic camera views: a hand-covered view is filled with a tone
  // from the middle of the skin model's HSV box, an empty view with a
  // deliberately non-skin color
  auto skin_rgb = hsv_to_rgb((skin.hue_lo + skin.hue_hi) / 2.0,
                             (skin.sat_lo + skin.sat_hi) / 2.0,
                             (skin.val_lo + skin.val_hi) / 2.0);
  auto view_frame = [&](bool hand) {
    Frame f(32, 32);
    for (uint32_t y = 0; y < 32; ++y)
      for (uint32_t x = 0; x < 32; ++x) {
        if (hand)
          f.set(x, y, skin_rgb[0], skin_rgb[1], skin_rgb[2]);
        else
          f.set(x, y, 40, 60, 200);
      }
    return f;
  };

  try {
    for (uint32_t i = 0; i < manifest.samples.size(); ++i) {
      const SampleRef& sample = manifest.samples[i];
      // scripted user behaviour: idle, operate for a few ticks, withdraw
      std::vector<bool> script;
      for (size_t k = 0, idle = 1 + rng.below(3); k < idle; ++k) script.push_back(false);
      for (size_t k = 0, busy = 1 + rng.below(4); k < busy; ++k) script.push_back(true);
      script.push_back(false);

      bool sent_ref = false, done = false;
      for (size_t k = 0; k < script.size() + 4 && !done; ++k) {
        bool hand = k < script.size() ? script[k] : false;
        MotionEvent ev = detector.step(view_frame(hand), skin, threshold);
        if (ev == MotionEvent::CaptureReference) {
          Frame virt_raw = load_frame(manifest.resolve(sample.virtual_layer));
          PreparedFrame ref = preprocess(virt_raw, cfg.crop, cfg.alpha, sample.alignment_points);
          send_message(*conn, SessionInitMsg{cfg.model_id, i, uint32_t(sample.step_class)});
          ReferenceFrameMsg rmsg;
          rmsg.alpha_milli = static_cast<uint16_t>(std::lround(cfg.alpha * 1000.0));
          rmsg.codec = detail::codec_to_wire(cfg.codec);
          rmsg.alignment_points = detail::to_wire_points(ref.points);
          rmsg.payload = encode(ref.frame, cfg.codec);
          send_message(*conn, rmsg);
          sent_ref = true;
        } else if (ev == MotionEvent::CaptureTarget && sent_ref) {
          // end-to-end clock starts at the motion event itself
          auto t_capture = std::chrono::steady_clock::now();
          Frame tgt_raw = load_frame(manifest.resolve(sample.target));
          PreparedFrame tgt = preprocess(tgt_raw, cfg.crop, cfg.alpha, sample.alignment_points);
          auto t_preproc = std::chrono::steady_clock::now();
          TargetFrameMsg tmsg;
          tmsg.alignment_points = detail::to_wire_points(tgt.points);
          tmsg.payload = encode(tgt.frame, cfg.codec);
          size_t tgt_payload_size = tmsg.payload.size();
          auto t_encode = std::chrono::steady_clock::now();
          send_message(*conn, tmsg);

          WireMessage reply = recv_message(*conn);
          const auto* result = std::get_if<VerifyResultMsg>(&reply);
          if (!result) raise(Errc::OutOfOrder, "expected VerifyResult");
          WireMessage ctrl = recv_message(*conn);
          const auto* step = std::get_if<StepControlMsg>(&ctrl);
          if (!step) raise(Errc::OutOfOrder, "expected StepControl");
          auto t_reply = std::chrono::steady_clock::now();
          auto ms = [](auto a, auto b) {
            return std::chrono::duration<double, std::milli>(b - a).count();
          };

          StepRecord rec;
          rec.sample_id = sample.id;
          rec.step_index = i;
          rec.ground_truth = sample.ground_truth;
          rec.pass = result->pass != 0;
          rec.iou_micro = result->iou_micro;
          rec.next_step = step->next_step;
          rec.tgt_bytes = tgt_payload_size;
          rec.preproc_ms = ms(t_capture, t_preproc);
          rec.encode_ms = ms(t_preproc, t_encode);
          rec.decode_ms = result->server_decode_us / 1000.0;
          rec.postproc_ms = result->server_postproc_us / 1000.0;
          rec.comm_ms =
              std::max(0.0, ms(t_encode, t_reply) - rec.decode_ms - rec.postproc_ms);
          rec.end_to_end_ms = ms(t_capture, t_reply);
          log.records.push_back(std::move(rec));
          detector.acknowledge_feedback();  // feedback refreshes the display
          done = true;
        }
      }
      if (!done) raise(Errc::Timeout, "motion script never produced a capture pair");
    }
    log.completed = true;
  } catch (const Error& e) {
    log.error = e.what();
  }
  return log;
}

// ---------------------------------------------------------------------------
// Session log emission: JSON-lines for records, CSV for the percentile
// summary.

inline void write_session_jsonl(const SessionLog& log, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& r : log.records) {
    nlohmann::json j = {{"sample_id", r.sample_id},
                        {"step_index", r.step_index},
                        {"ground_truth", r.ground_truth},
                        {"pass", r.pass},
                        {"iou_micro", r.iou_micro},
                        {"next_step", r.next_step},
                        {"ref_bytes", r.ref_bytes},
                        {"tgt_bytes", r.tgt_bytes},
                        {"preproc_ms", r.preproc_ms},
                        {"encode_ms", r.encode_ms},
                        {"comm_ms", r.comm_ms},
                        {"decode_ms", r.decode_ms},
                        {"postproc_ms", r.postproc_ms},
                        {"end_to_end_ms", r.end_to_end_ms}};
    os << j.dump() << "\n";
  }
  auto text = os.str();
  write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
}

struct LatencySummary {
  double mean = 0, median = 0, p95 = 0, p99 = 0;
};

inline LatencySummary summarize(std::vector<double> values) {
  LatencySummary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  double acc = 0;
  for (double v : values) acc += v;
  s.mean = acc / static_cast<double>(values.size());
  auto nearest_rank = [&](double q) {
    size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(values.size())));
    rank = std::clamp<size_t>(rank, 1, values.size());
    return values[rank - 1];
  };
  s.median = nearest_rank(0.5);
  s.p95 = nearest_rank(0.95);
  s.p99 = nearest_rank(0.99);
  return s;
}

inline void write_session_summary_csv(const SessionLog& log, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "metric,mean,median,p95,p99\n";
  auto emit = [&](const char* name, auto getter) {
    std::vector<double> vals;
    vals.reserve(log.records.size());
    for (const auto& r : log.records) vals.push_back(getter(r));
    LatencySummary s = summarize(std::move(vals));
    os << name << ',' << s.mean << ',' << s.median << ',' << s.p95 << ',' << s.p99 << "\n";
  };
  emit("preproc_ms", [](const StepRecord& r) { return r.preproc_ms; });
  emit("encode_ms", [](const StepRecord& r) { return r.encode_ms; });
  emit("comm_ms", [](const StepRecord& r) { return r.comm_ms; });
  emit("decode_ms", [](const StepRecord& r) { return r.decode_ms; });
  emit("postproc_ms", [](const StepRecord& r) { return r.postproc_ms; });
  emit("end_to_end_ms", [](const StepRecord& r) { return r.end_to_end_ms; });
  emit("ref_bytes", [](const StepRecord& r) { return double(r.ref_bytes); });
  emit("tgt_bytes", [](const StepRecord& r) { return double(r.tgt_bytes); });
  auto text = os.str();
  write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
}

}  // namespace mrv
