// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
//
// Drives the installed CLI binary end to end over small fixtures.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "mrv/codec.hpp"
#include "mrv/dataset.hpp"

using namespace mrv;
namespace fs = std::filesystem;

#ifndef MRVERIFY_BIN
#error "MRVERIFY_BIN must point at the CLI binary"
#endif

namespace {

int run(const std::string& args, std::string* output = nullptr) {
  std::string cmd = std::string(MRVERIFY_BIN) + " " + args;
  if (output) {
    fs::path tmp = fs::path(::testing::TempDir()) / "mrv_cli_capture.txt";
    cmd += " > " + tmp.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    std::ifstream in(tmp);
    output->assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return rc;
  }
  cmd += " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

struct CliWorkspace : ::testing::Test {
  fs::path dir;
  void SetUp() override {
    dir = fs::path(::testing::TempDir()) / "mrv_cli_ws";
    fs::remove_all(dir);
    fs::create_directories(dir);
    ASSERT_EQ(run("gen-fixtures --out " + (dir / "fx").string() +
                  " --count 5 --width 160 --height 160 --classes 4 --min-side 28 "
                  "--max-side 48 --seed 5"),
              0);
  }
  std::string p(const std::string& rel) { return (dir / rel).string(); }
};

}  // namespace

TEST_F(CliWorkspace, GenDatasetBalancedAndDeterministic) {
  ASSERT_EQ(run("gen-dataset --sources " + p("fx") + " --out " + p("data") +
                " --count 16 --seed 9"),
            0);
  auto manifest = load_manifest(dir / "data" / "manifest_val.json");
  EXPECT_EQ(manifest.samples.size(), 16u);
  size_t pos = 0;
  for (const auto& s : manifest.samples) pos += s.ground_truth ? 1 : 0;
  EXPECT_EQ(pos, 8u);

  // same seed, fresh directory: byte-identical sample files
  ASSERT_EQ(run("gen-dataset --sources " + p("fx") + " --out " + p("data2") +
                " --count 16 --seed 9"),
            0);
  auto manifest2 = load_manifest(dir / "data2" / "manifest_val.json");
  for (size_t i = 0; i < manifest.samples.size(); ++i)
    EXPECT_EQ(manifest.samples[i].crc, manifest2.samples[i].crc) << i;
}

TEST_F(CliWorkspace, MissingSourcesDirNamedInError) {
  std::string out;
  int rc = run("gen-dataset --sources " + p("nope") + " --out " + p("d"), &out);
  EXPECT_NE(rc, 0);
  EXPECT_NE(out.find("nope"), std::string::npos);
}

TEST_F(CliWorkspace, InvalidAlphaRejectedByValidation) {
  ASSERT_EQ(run("gen-dataset --sources " + p("fx") + " --out " + p("data") +
                " --count 4 --seed 9"),
            0);
  std::string out;
  int rc = run("evaluate --manifest " + p("data/manifest_val.json") +
                   " --alpha 1.5 --out " + p("ev"),
               &out);
  EXPECT_NE(rc, 0);
  EXPECT_NE(out.find("alpha"), std::string::npos);
}

TEST_F(CliWorkspace, EvaluateEmitsReportFiles) {
  ASSERT_EQ(run("gen-dataset --sources " + p("fx") + " --out " + p("data") +
                " --count 12 --seed 9"),
            0);
  std::string out;
  ASSERT_EQ(run("evaluate --manifest " + p("data/manifest_val.json") + " --out " + p("ev") +
                    " --jobs 2",
                &out),
            0);
  EXPECT_NE(out.find("acc=1"), std::string::npos) << out;
  EXPECT_TRUE(fs::exists(dir / "ev" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "ev" / "records.csv"));
  EXPECT_TRUE(fs::exists(dir / "ev" / "curve.csv"));

  // report recomputes from the records csv
  std::string rep;
  ASSERT_EQ(run("report --records " + p("ev/records.csv") + " --threshold 0.5", &rep), 0);
  EXPECT_NE(rep.find("acc=1"), std::string::npos) << rep;
}

TEST_F(CliWorkspace, CosineStubEmbeddingsRun) {
  ASSERT_EQ(run("gen-dataset --sources " + p("fx") + " --out " + p("data") +
                " --count 8 --seed 9"),
            0);
  std::string out;
  ASSERT_EQ(run("evaluate --manifest " + p("data/manifest_val.json") +
                    " --method cosine --stub-embeddings --out " + p("cos"),
                &out),
            0);
  EXPECT_NE(out.find("method=cosine"), std::string::npos) << out;
  EXPECT_TRUE(fs::exists(dir / "cos" / "report.json"));
}

TEST_F(CliWorkspace, SweepWritesCurveAndBestThreshold) {
  ASSERT_EQ(run("gen-dataset --sources " + p("fx") + " --out " + p("data") +
                " --count 12 --seed 9"),
            0);
  ASSERT_EQ(run("sweep --manifest " + p("data/manifest_val.json") + " --out " + p("sw")), 0);
  EXPECT_TRUE(fs::exists(dir / "sw" / "curve.csv"));
  auto raw = read_file(dir / "sw" / "sweep.json");
  nlohmann::json j = nlohmann::json::parse(raw.begin(), raw.end());
  EXPECT_DOUBLE_EQ(j.at("best_acc").get<double>(), 1.0);
}

TEST_F(CliWorkspace, ConfigFileDrivesRunAndUnknownKeysFail) {
  ASSERT_EQ(run("gen-dataset --sources " + p("fx") + " --out " + p("data") +
                " --count 8 --seed 9"),
            0);
  std::ofstream(dir / "run.toml") << "alpha = 0.5\nthreshold = 0.4\n[perturb]\nseed = 2\n";
  ASSERT_EQ(run("evaluate --manifest " + p("data/manifest_val.json") + " --config " +
                p("run.toml") + " --out " + p("evc")),
            0);

  std::ofstream(dir / "bad.toml") << "alhpa = 0.5\n";
  std::string out;
  int rc = run("evaluate --manifest " + p("data/manifest_val.json") + " --config " +
                   p("bad.toml") + " --out " + p("evb"),
               &out);
  EXPECT_NE(rc, 0);
  EXPECT_NE(out.find("alhpa"), std::string::npos);
}

TEST_F(CliWorkspace, StubSegmentSpeaksAdapterFormat) {
  std::string frame = p("fx/fixture_000.png");
  ASSERT_EQ(run("stub-segment " + frame + " " + p("stub") + " --class-id 2"), 0);
  ASSERT_TRUE(fs::exists(dir / "stub" / "index.json"));
  auto raw = read_file(dir / "stub" / "index.json");
  nlohmann::json j = nlohmann::json::parse(raw.begin(), raw.end());
  ASSERT_GE(j.at("candidates").size(), 1u);
  EXPECT_EQ(j.at("candidates")[0].at("class_id").get<int>(), 2);
  auto mask = load_mask(dir / "stub" / j.at("candidates")[0].at("file").get<std::string>());
  EXPECT_EQ(mask.width(), 160u);
  EXPECT_FALSE(mask.empty());
}
