// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mrv/codec.hpp"
#include "mrv/segmentation.hpp"

using namespace mrv;
namespace fs = std::filesystem;

namespace {

Mask rect_mask(uint32_t w, uint32_t h, uint32_t x0, uint32_t y0, uint32_t rw, uint32_t rh) {
  Mask m(w, h);
  for (uint32_t y = y0; y < y0 + rh; ++y)
    for (uint32_t x = x0; x < x0 + rw; ++x) m.set(x, y, 1);
  return m;
}

LabelStore two_instance_store() {
  LabelStore store;
  std::vector<InstanceLabel> labels;
  labels.push_back(make_instance(3, rect_mask(64, 64, 4, 4, 10, 8)));
  labels.push_back(make_instance(5, rect_mask(64, 64, 30, 30, 8, 8)));
  labels.push_back(make_instance(3, rect_mask(64, 64, 44, 10, 12, 6)));
  store["frame_a"] = std::move(labels);
  return store;
}

}  // namespace

TEST(InstanceLabel, TightBboxComputed) {
  auto inst = make_instance(2, rect_mask(32, 32, 5, 7, 9, 3));
  EXPECT_EQ(inst.bbox.x, 5u);
  EXPECT_EQ(inst.bbox.y, 7u);
  EXPECT_EQ(inst.bbox.w, 9u);
  EXPECT_EQ(inst.bbox.h, 3u);
}

TEST(InstanceLabel, EmptyMaskRejected) {
  EXPECT_THROW(make_instance(1, Mask(8, 8)), Error);
}

TEST(ExtractReferenceMask, BlackLayerRaises) {
  try {
    extract_reference_mask(Frame(16, 16));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyReferenceMask);
  }
}

TEST(ExtractReferenceMask, BrickAndFaintPixelsIncluded) {
  Frame layer(32, 32);
  for (uint32_t y = 6; y < 14; ++y)
    for (uint32_t x = 10; x < 22; ++x) layer.set(x, y, 90, 120, 200);
  layer.set(0, 0, 1, 1, 1);  // dark but non-zero counts as rendered
  Mask m = extract_reference_mask(layer);
  EXPECT_EQ(m.count(), size_t(12 * 8 + 1));
  EXPECT_EQ(m.at(0, 0), 1);
}

TEST(Perturb, IdentitySpecReturnsInput) {
  Mask m = rect_mask(20, 20, 3, 3, 6, 6);
  auto out = perturb(m, PerturbationSpec{}, 42);
  ASSERT_TRUE(out.has_value());
  EXPECT_EQ(*out, m);
}

TEST(Perturb, DilateRadiusOneGrowsTwoByTwoTo12) {
  Mask m = rect_mask(32, 32, 10, 10, 2, 2);
  PerturbationSpec spec;
  spec.dilate_erode_radius = 1;
  auto out = perturb(m, spec, 0);
  ASSERT_TRUE(out.has_value());
  EXPECT_EQ(out->count(), 12u);
}

TEST(Perturb, DeterministicForSeedAndIndex) {
  Mask m = rect_mask(48, 48, 12, 12, 10, 10);
  PerturbationSpec spec;
  spec.dilate_erode_radius = 1;
  spec.jitter_sigma = 2.0;
  spec.miss_rate = 0.3;
  spec.seed = 99;
  for (uint64_t idx : {0ull, 7ull, 123ull}) {
    auto a = perturb(m, spec, idx);
    auto b = perturb(m, spec, idx);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) EXPECT_EQ(*a, *b);
  }
}

TEST(Perturb, JitterPreservesCountWhileInBounds) {
  Mask m = rect_mask(64, 64, 28, 28, 8, 8);  // plenty of margin for sigma 2
  PerturbationSpec spec;
  spec.jitter_sigma = 2.0;
  spec.seed = 5;
  for (uint64_t idx = 0; idx < 50; ++idx) {
    auto out = perturb(m, spec, idx);
    ASSERT_TRUE(out.has_value());
    EXPECT_EQ(out->count(), m.count());
  }
}

TEST(Perturb, MissRateOneAlwaysMisses) {
  Mask m = rect_mask(16, 16, 2, 2, 4, 4);
  PerturbationSpec spec;
  spec.miss_rate = 1.0;
  for (uint64_t idx = 0; idx < 10; ++idx) EXPECT_FALSE(perturb(m, spec, idx).has_value());
}

TEST(OracleSegmenter, ReturnsGroundTruthForMatchingClass) {
  OracleSegmenter oracle(two_instance_store(), PerturbationSpec{});
  Frame frame(64, 64);
  SegmentQuery q;
  q.frame_key = "frame_a";
  q.step_class = 3;
  auto out = oracle.segment(frame, q);
  ASSERT_EQ(out.candidates.size(), 2u);  // two instances of class 3
  EXPECT_EQ(out.candidates[0].class_id, 3);
  EXPECT_EQ(out.candidates[1].class_id, 3);
  EXPECT_EQ(out.candidates[0].mask, rect_mask(64, 64, 4, 4, 10, 8));
  EXPECT_EQ(out.candidates[1].mask, rect_mask(64, 64, 44, 10, 12, 6));
  EXPECT_DOUBLE_EQ(out.candidates[0].confidence, 1.0);
}

TEST(OracleSegmenter, AbsentClassYieldsEmptyOutput) {
  OracleSegmenter oracle(two_instance_store(), PerturbationSpec{});
  SegmentQuery q;
  q.frame_key = "frame_a";
  q.step_class = 9;
  EXPECT_TRUE(oracle.segment(Frame(64, 64), q).candidates.empty());
}

TEST(OracleSegmenter, MissRateOneSilencesEverything) {
  PerturbationSpec spec;
  spec.miss_rate = 1.0;
  OracleSegmenter oracle(two_instance_store(), spec);
  SegmentQuery q;
  q.frame_key = "frame_a";
  q.step_class = 3;
  EXPECT_TRUE(oracle.segment(Frame(64, 64), q).candidates.empty());
}

TEST(OracleSegmenter, UnknownFrameRaises) {
  OracleSegmenter oracle(two_instance_store(), PerturbationSpec{});
  SegmentQuery q;
  q.frame_key = "nope";
  q.step_class = 3;
  try {
    oracle.segment(Frame(64, 64), q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownFrame);
  }
}

TEST(OracleSegmenter, QueryGeometryTransformsMasks) {
  OracleSegmenter oracle(two_instance_store(), PerturbationSpec{});
  SegmentQuery q;
  q.frame_key = "frame_a";
  q.step_class = 5;
  q.crop = Region{16, 16, 48, 48};
  q.out_w = 24;
  q.out_h = 24;
  auto out = oracle.segment(Frame(24, 24), q);
  ASSERT_EQ(out.candidates.size(), 1u);
  Mask expect = scale_mask_to(crop(rect_mask(64, 64, 30, 30, 8, 8), q.crop), 24, 24);
  EXPECT_EQ(out.candidates[0].mask, expect);
}

TEST(OracleSegmenter, NeverReturnsOtherClasses) {
  PerturbationSpec spec;
  spec.spurious_rate = 1.0;
  spec.seed = 3;
  OracleSegmenter oracle(two_instance_store(), spec);
  SegmentQuery q;
  q.frame_key = "frame_a";
  for (int cls : {3, 5}) {
    q.step_class = cls;
    for (const auto& c : oracle.segment(Frame(64, 64), q).candidates)
      EXPECT_EQ(c.class_id, cls);
  }
}

TEST(OracleSegmenter, SpuriousCandidateAppended) {
  PerturbationSpec spec;
  spec.spurious_rate = 1.0;
  spec.seed = 3;
  OracleSegmenter oracle(two_instance_store(), spec);
  SegmentQuery q;
  q.frame_key = "frame_a";
  q.step_class = 5;
  auto out = oracle.segment(Frame(64, 64), q);
  ASSERT_EQ(out.candidates.size(), 2u);  // the true instance plus one ghost
  EXPECT_NE(out.candidates[1].mask, out.candidates[0].mask);
}

class ExternalAdapterTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) / "mrv_adapter_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    // canned adapter: emits one class-3 mask regardless of input
    mask_ = rect_mask(24, 18, 2, 2, 8, 6);
    save_mask_png(dir_ / "canned_mask.png", mask_);
    script_ = dir_ / "stub.sh";
    std::ofstream out(script_);
    out << "#!/bin/sh\n"
        << "cp \"" << (dir_ / "canned_mask.png").string() << "\" \"$2/mask0.png\"\n"
        << "printf '%s' '{\"candidates\":[{\"class_id\":3,\"confidence\":0.9,"
           "\"file\":\"mask0.png\"}]}' > \"$2/index.json\"\n";
    out.close();
    fs::permissions(script_, fs::perms::owner_all);
  }
  fs::path dir_, script_;
  Mask mask_;
};

TEST_F(ExternalAdapterTest, RoundtripsMaskAndFiltersClass) {
  ExternalSegmenter seg("/bin/sh " + script_.string() + " {frame} {out}", dir_ / "work");
  Frame frame(24, 18);
  SegmentQuery q;
  q.step_class = 3;
  auto out = seg.segment(frame, q);
  ASSERT_EQ(out.candidates.size(), 1u);
  EXPECT_EQ(out.candidates[0].mask, mask_);
  EXPECT_NEAR(out.candidates[0].confidence, 0.9, 1e-12);

  q.step_class = 4;  // class mismatch filtered out
  EXPECT_TRUE(seg.segment(frame, q).candidates.empty());
}

TEST_F(ExternalAdapterTest, FailingCommandRaises) {
  ExternalSegmenter seg("/bin/sh -c 'exit 3'", dir_ / "work2");
  SegmentQuery q;
  q.step_class = 3;
  try {
    seg.segment(Frame(8, 8), q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SegmenterFailure);
  }
}

TEST_F(ExternalAdapterTest, MissingIndexRaises) {
  ExternalSegmenter seg("/bin/sh -c 'true'", dir_ / "work3");
  SegmentQuery q;
  q.step_class = 3;
  try {
    seg.segment(Frame(8, 8), q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SegmenterFailure);
  }
}
