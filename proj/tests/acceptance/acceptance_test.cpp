// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line
// with its measured values; run via `ctest -R acceptance` or directly.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "mrv/client.hpp"
#include "mrv/dataset.hpp"
#include "mrv/geometry.hpp"
#include "mrv/metrics.hpp"
#include "mrv/motion.hpp"
#include "mrv/pipeline.hpp"
#include "mrv/protocol.hpp"
#include "mrv/report.hpp"
#include "mrv/rng.hpp"
#include "mrv/server.hpp"

using namespace mrv;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Prints the criterion verdict when the test body finishes.
struct Criterion {
  int id;
  std::ostringstream detail;
  explicit Criterion(int id_) : id(id_) {}
  ~Criterion() {
    std::cout << "[CRITERION " << id << "] "
              << (::testing::Test::HasFailure() ? "FAIL" : "PASS");
    auto text = detail.str();
    if (!text.empty()) std::cout << " (" << text << ")";
    std::cout << std::endl;
  }
};

// The desk-scale dataset shared by the pipeline criteria: 24 annotated
// 640x640 fixtures, 200 balanced pairs per split, fixed seeds.
struct DeskEnv {
  fs::path root;
  BuiltDataset built;
  LabelStore labels;
  double gen_seconds = 0.0;

  static DeskEnv& get() {
    static DeskEnv env;
    return env;
  }

 private:
  DeskEnv() {
    root = fs::temp_directory_path() / "mrv_acceptance_desk";
    fs::remove_all(root);
    auto t0 = std::chrono::steady_clock::now();
    FixtureConfig fx;
    fx.count = 24;
    fx.width = 640;
    fx.height = 640;
    fx.class_count = 8;
    fx.seed = 11;
    generate_fixtures(fx, root / "fixtures");
    DatasetConfig cfg;
    cfg.seed = 7;
    cfg.val_count = 200;
    cfg.test_count = 200;
    built = build_dataset(load_annotated_dir(root / "fixtures"), cfg, root / "data");
    gen_seconds = seconds_since(t0);
    labels = load_label_store(built.val);
  }
};

PerturbationSpec robustness_spec(uint64_t seed) {
  PerturbationSpec spec;
  spec.dilate_erode_radius = 2;
  spec.jitter_sigma = 2.0;
  spec.miss_rate = 0.05;
  spec.seed = seed;
  return spec;
}

std::pair<std::vector<double>, std::vector<bool>> scores_of(
    const std::vector<SampleResult>& results) {
  std::vector<double> scores;
  std::vector<bool> truths;
  for (const auto& r : results) {
    scores.push_back(r.score);
    truths.push_back(r.ground_truth);
  }
  return {scores, truths};
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

Homography random_projective(Rng& rng) {
  for (;;) {
    Homography h;
    h.m[0][0] = rng.uniform(0.6, 1.6);
    h.m[0][1] = rng.uniform(-0.4, 0.4);
    h.m[0][2] = rng.uniform(-120.0, 120.0);
    h.m[1][0] = rng.uniform(-0.4, 0.4);
    h.m[1][1] = rng.uniform(0.6, 1.6);
    h.m[1][2] = rng.uniform(-120.0, 120.0);
    h.m[2][0] = rng.uniform(-1e-4, 1e-4);
    h.m[2][1] = rng.uniform(-1e-4, 1e-4);
    h.m[2][2] = 1.0;
    if (std::abs(h.det()) > 0.05) return h;
  }
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& truths) {
  double credit = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!truths[i]) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (truths[j]) continue;
      ++pairs;
      if (scores[i] > scores[j])
        credit += 1.0;
      else if (scores[i] == scores[j])
        credit += 0.5;
    }
  }
  return credit / static_cast<double>(pairs);
}

}  // namespace

// 1. Oracle end-to-end accuracy on the desk dataset, within the time budget.
TEST(Acceptance, C01_OracleEndToEndAccuracy) {
  Criterion c(1);
  auto& env = DeskEnv::get();
  auto t0 = std::chrono::steady_clock::now();

  OracleSegmenter seg(env.labels, PerturbationSpec{});
  PipelineOptions opts;  // alpha 1.0, lossless, threshold swept below
  auto val_results = evaluate_manifest(env.built.val, &seg, nullptr, Method::Iou, opts, 0);
  auto [val_scores, val_truths] = scores_of(val_results);
  auto [thr, val_acc] = best_threshold(sweep(val_scores, val_truths));

  auto test_results = evaluate_manifest(env.built.test, &seg, nullptr, Method::Iou, opts, 0);
  auto [test_scores, test_truths] = scores_of(test_results);
  double test_acc = rates(confusion(test_scores, test_truths, thr)).acc;

  std::vector<double> pos_iou;
  double neg_max = 0.0;
  for (const auto& r : test_results) {
    if (r.ground_truth)
      pos_iou.push_back(r.decision.iou);
    else
      neg_max = std::max(neg_max, r.decision.iou);
  }
  double pos_median = median_of(pos_iou);
  double runtime = env.gen_seconds + seconds_since(t0);

  EXPECT_EQ(env.built.val.samples.size(), 200u);
  EXPECT_GE(test_acc, 0.99);
  EXPECT_GE(pos_median, 0.95);
  EXPECT_LE(neg_max, 1.0 / 3.0 + 1e-9);
  EXPECT_LT(runtime, 60.0);
  c.detail << "acc=" << test_acc << " pos_iou_median=" << pos_median
           << " neg_iou_max=" << neg_max << " swept_thr=" << thr << " runtime_s=" << runtime;
}

// 2. Accuracy under segmenter degradation, averaged over 5 seeds.
TEST(Acceptance, C02_DegradationRobustness) {
  Criterion c(2);
  auto& env = DeskEnv::get();
  PipelineOptions opts;
  double acc_sum = 0.0;
  std::ostringstream per_seed;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    OracleSegmenter seg(env.labels, robustness_spec(seed));
    auto results = evaluate_manifest(env.built.val, &seg, nullptr, Method::Iou, opts, 0);
    auto [scores, truths] = scores_of(results);
    auto [thr, acc] = best_threshold(sweep(scores, truths));
    (void)thr;
    acc_sum += acc;
    per_seed << (seed > 1 ? "," : "") << acc;
  }
  double mean_acc = acc_sum / 5.0;
  // 0.90 target with the +-0.05 tolerance band over seeds
  EXPECT_GE(mean_acc, 0.85);
  c.detail << "mean_best_acc=" << mean_acc << " per_seed=[" << per_seed.str() << "]";
}

// 3. The IoU policy separates better than the PSNR baseline by a wide margin.
TEST(Acceptance, C03_BaselineSeparationDirection) {
  Criterion c(3);
  auto& env = DeskEnv::get();
  PipelineOptions opts;
  OracleSegmenter seg(env.labels, PerturbationSpec{});
  auto iou_results = evaluate_manifest(env.built.val, &seg, nullptr, Method::Iou, opts, 0);
  auto psnr_results = evaluate_manifest(env.built.val, nullptr, nullptr, Method::Psnr, opts, 0);

  auto [iou_scores, iou_truths] = scores_of(iou_results);
  auto [psnr_scores, psnr_truths] = scores_of(psnr_results);
  double auc_iou = auc(sweep(iou_scores, iou_truths));
  double auc_psnr = auc(sweep(psnr_scores, psnr_truths));

  EXPECT_GE(auc_iou - auc_psnr, 0.10);
  c.detail << "auc_iou=" << auc_iou << " auc_psnr=" << auc_psnr
           << " gap=" << (auc_iou - auc_psnr);
}

// 4. Homography synthesize-and-recover at scale, exact and noisy.
TEST(Acceptance, C04_HomographySynthesizeRecover) {
  Criterion c(4);
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(404);
  double worst_exact = 0.0;
  double noisy_sq_sum = 0.0;
  size_t noisy_n = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Homography truth = random_projective(rng);
    std::vector<Correspondence> exact, noisy;
    for (int i = 0; i < 8; ++i) {
      Point2 p{rng.uniform(0.0, 640.0), rng.uniform(0.0, 640.0)};
      Point2 q = project(truth, p);
      exact.push_back({p, q});
      noisy.push_back({p, {q.x + rng.normal(0, 0.1), q.y + rng.normal(0, 0.1)}});
    }
    Homography he = estimate_homography(exact);
    for (const auto& pair : exact) {
      Point2 q = project(he, pair.src);
      worst_exact = std::max(worst_exact, std::hypot(q.x - pair.dst.x, q.y - pair.dst.y));
    }
    Homography hn = estimate_homography(noisy);
    for (const auto& pair : noisy) {
      Point2 q = project(hn, pair.src);
      noisy_sq_sum += (q.x - pair.dst.x) * (q.x - pair.dst.x) +
                      (q.y - pair.dst.y) * (q.y - pair.dst.y);
      ++noisy_n;
    }
  }
  double noisy_rms = std::sqrt(noisy_sq_sum / static_cast<double>(noisy_n));
  double runtime = seconds_since(t0);

  EXPECT_LT(worst_exact, 1e-6);
  EXPECT_LT(noisy_rms, 0.5);
  EXPECT_LT(runtime, 10.0);
  c.detail << "max_exact_err_px=" << worst_exact << " noisy_rms_px=" << noisy_rms
           << " runtime_s=" << runtime;
}

// 5. Trapezoidal AUC equals the pairwise-ranking AUC on random score sets.
TEST(Acceptance, C05_AucOracleEquivalence) {
  Criterion c(5);
  Rng rng(505);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    size_t n = 2 + rng.below(999);
    std::vector<double> scores(n);
    std::vector<bool> truths(n);
    bool pos = false, neg = false;
    for (size_t i = 0; i < n; ++i) {
      scores[i] = std::floor(rng.next_double() * 50.0) / 50.0;  // force ties
      truths[i] = rng.chance(0.5);
      (truths[i] ? pos : neg) = true;
    }
    if (!pos || !neg) {
      truths[0] = true;
      truths[n - 1] = false;
    }
    double trap = auc(sweep(scores, truths));
    double mw = pairwise_auc(scores, truths);
    worst = std::max(worst, std::abs(trap - mw));
  }
  EXPECT_LT(worst, 1e-9);
  c.detail << "max_abs_diff=" << worst;
}

// 6. Wire bit-exactness plus online/offline decision equivalence.
TEST(Acceptance, C06_ProtocolBitExactnessAndEquivalence) {
  Criterion c(6);
  // 10,000 random messages round-trip bit-exactly
  Rng rng(606);
  size_t roundtrips = 0;
  for (int it = 0; it < 10000; ++it) {
    WireMessage m;
    switch (rng.below(6)) {
      case 0:
        m = SessionInitMsg{uint32_t(rng.next_u64()), uint32_t(rng.next_u64()),
                           uint32_t(rng.next_u64())};
        break;
      case 1: {
        ReferenceFrameMsg r;
        r.alpha_milli = uint16_t(rng.below(1001));
        r.codec = uint8_t(rng.below(101));
        r.alignment_points.resize(rng.below(10));
        for (auto& [x, y] : r.alignment_points) {
          x = float(rng.uniform(-5000, 5000));
          y = float(rng.uniform(-5000, 5000));
        }
        r.payload.resize(rng.below(512));
        for (auto& b : r.payload) b = uint8_t(rng.next_u64());
        m = std::move(r);
        break;
      }
      case 2: {
        TargetFrameMsg t;
        t.alignment_points.resize(rng.below(10));
        for (auto& [x, y] : t.alignment_points) {
          x = float(rng.uniform(-5000, 5000));
          y = float(rng.uniform(-5000, 5000));
        }
        t.payload.resize(rng.below(512));
        for (auto& b : t.payload) b = uint8_t(rng.next_u64());
        m = std::move(t);
        break;
      }
      case 3:
        m = VerifyResultMsg{uint8_t(rng.below(2)), uint32_t(rng.below(1000001)),
                            uint32_t(rng.next_u64()), uint32_t(rng.next_u64())};
        break;
      case 4:
        m = StepControlMsg{uint32_t(rng.next_u64())};
        break;
      default: {
        ErrorMsg e;
        e.code = uint16_t(rng.below(6) + 1);
        for (size_t i = 0, n = rng.below(64); i < n; ++i)
          e.message.push_back(char('!' + rng.below(90)));
        m = std::move(e);
        break;
      }
    }
    auto bytes = encode_message(m);
    ASSERT_EQ(decode_message(bytes), m);
    ASSERT_EQ(encode_message(decode_message(bytes)), bytes);
    ++roundtrips;
  }

  // loopback decisions equal offline decisions for every sample
  auto& env = DeskEnv::get();
  auto segmenter = std::make_shared<OracleSegmenter>(env.labels, PerturbationSpec{});
  auto manifest = std::make_shared<DatasetManifest>(env.built.val);
  EdgeServer server(ServerConfig{}, segmenter, manifest);
  server.start();
  ClientConfig cc;
  cc.port = server.port();
  cc.alpha = 0.5;
  cc.codec = CodecSpec::lossless();
  SessionLog log = run_client_session(*manifest, cc);
  server.stop();
  ASSERT_TRUE(log.completed) << log.error;
  ASSERT_EQ(log.records.size(), manifest->samples.size());

  PipelineOptions opts;
  opts.alpha = 0.5;
  opts.codec_roundtrip = true;
  OracleSegmenter offline_seg(env.labels, PerturbationSpec{});
  auto offline = evaluate_manifest(*manifest, &offline_seg, nullptr, Method::Iou, opts, 0);
  size_t mismatches = 0;
  for (size_t i = 0; i < offline.size(); ++i) {
    uint32_t offline_micro = uint32_t(std::lround(offline[i].decision.iou * 1e6));
    if (log.records[i].pass != offline[i].decision.pass ||
        log.records[i].iou_micro != offline_micro)
      ++mismatches;
  }
  EXPECT_EQ(mismatches, 0u);
  c.detail << "roundtrips=" << roundtrips << " samples=" << offline.size()
           << " mismatches=" << mismatches;
}

// 7. Loopback latency budget at 640x640, alpha 0.5, oracle segmenter.
TEST(Acceptance, C07_PipelineLatencyBudget) {
  Criterion c(7);
  auto& env = DeskEnv::get();
  auto segmenter = std::make_shared<OracleSegmenter>(env.labels, PerturbationSpec{});
  auto manifest = std::make_shared<DatasetManifest>(env.built.val);
  EdgeServer server(ServerConfig{}, segmenter, manifest);
  server.start();
  ClientConfig cc;
  cc.port = server.port();
  cc.alpha = 0.5;
  cc.codec = CodecSpec::lossy(80);  // the deployed-transport codec class
  SessionLog log = run_client_session(*manifest, cc);
  server.stop();
  ASSERT_TRUE(log.completed) << log.error;

  std::vector<double> e2e;
  for (const auto& r : log.records) e2e.push_back(r.end_to_end_ms);
  double mean = 0.0;
  for (double v : e2e) mean += v;
  mean /= double(e2e.size());

  EXPECT_LT(mean, 100.0);
  c.detail << "mean_e2e_ms=" << mean << " median_e2e_ms=" << median_of(e2e)
           << " samples=" << e2e.size();
}

// 8. Lossy transport shrinks frames hard without hurting accuracy.
TEST(Acceptance, C08_CompressionBenchmarkDirection) {
  Criterion c(8);
  auto& env = DeskEnv::get();
  OracleSegmenter seg(env.labels, PerturbationSpec{});

  auto run_with = [&](const CodecSpec& codec) {
    PipelineOptions opts;
    opts.codec = codec;
    opts.codec_roundtrip = true;
    auto results = evaluate_manifest(env.built.val, &seg, nullptr, Method::Iou, opts, 0);
    double bytes = 0.0;
    for (const auto& r : results) bytes += double(r.ref_bytes + r.tgt_bytes);
    bytes /= double(results.size());
    auto [scores, truths] = scores_of(results);
    auto [thr, acc] = best_threshold(sweep(scores, truths));
    (void)thr;
    return std::make_pair(bytes, acc);
  };
  auto [lossless_bytes, lossless_acc] = run_with(CodecSpec::lossless());
  auto [lossy_bytes, lossy_acc] = run_with(CodecSpec::lossy(80));

  EXPECT_LE(lossy_bytes, 0.25 * lossless_bytes);
  EXPECT_LE(lossless_acc - lossy_acc, 0.03);
  c.detail << "lossy/lossless_size=" << (lossy_bytes / lossless_bytes)
           << " acc_lossless=" << lossless_acc << " acc_lossy=" << lossy_acc;
}

// 9. Alpha sweep: sizes grow with alpha, IoU separation collapses at the
// low-resolution end.
TEST(Acceptance, C09_AlphaSweepReproduction) {
  Criterion c(9);
  auto& env = DeskEnv::get();
  OracleSegmenter seg(env.labels, robustness_spec(1));

  std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> sizes, separations;
  for (double a : alphas) {
    PipelineOptions opts;
    opts.alpha = a;
    opts.codec = CodecSpec::lossy(80);  // transport codec, as deployed
    opts.codec_roundtrip = true;
    auto results = evaluate_manifest(env.built.val, &seg, nullptr, Method::Iou, opts, 0);
    double bytes = 0.0;
    std::vector<double> pos, neg;
    for (const auto& r : results) {
      bytes += double(r.ref_bytes + r.tgt_bytes);
      (r.ground_truth ? pos : neg).push_back(r.score);
    }
    sizes.push_back(bytes / double(results.size()));
    separations.push_back(median_of(pos) - median_of(neg));
  }
  bool monotone = true;
  for (size_t i = 0; i + 1 < sizes.size(); ++i) monotone = monotone && sizes[i] <= sizes[i + 1];

  EXPECT_TRUE(monotone);
  EXPECT_GT(separations.back(), separations.front());
  c.detail << "sizes=[" << sizes.front() << ".." << sizes.back() << "]"
           << " sep_alpha0.1=" << separations.front()
           << " sep_alpha1.0=" << separations.back();
}

// 10. Motion FSM trace properties over random scripted sessions.
TEST(Acceptance, C10_MotionFsmTraceProperties) {
  Criterion c(10);
  Rng rng(1010);
  size_t sequences = 0, references = 0, targets = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    MotionDetector det;
    int last = -1;  // -1 none, 0 reference, 1 target
    for (int step = 0; step < 100; ++step) {
      Stage before = det.stage();
      bool hand = rng.chance(0.4);
      MotionEvent ev = det.step_with_proportion(hand ? 1.0 : 0.0, 0.05);
      if (ev == MotionEvent::CaptureReference) {
        ASSERT_NE(last, 0) << "two references without a target between them";
        last = 0;
        ++references;
      } else if (ev == MotionEvent::CaptureTarget) {
        ASSERT_EQ(last, 0) << "target not preceded by a reference";
        ASSERT_EQ(before, Stage::Busy);
        ASSERT_EQ(det.stage(), Stage::Idle);
        last = 1;
        ++targets;
      }
      if (det.awaiting_feedback() && rng.chance(0.25)) det.acknowledge_feedback();
    }
    ++sequences;
  }
  c.detail << "sequences=" << sequences << " references=" << references
           << " targets=" << targets;
}
