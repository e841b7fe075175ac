// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
//
// mrverify: MR-aided operation verification toolkit.
//
// Dataset generation, offline evaluation, threshold sweeps, the edge
// server, the client simulator and the codec/resolution benchmarks, all in
// one binary. See README.md for the file formats and the wire protocol.

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>

#include "mrv/client.hpp"
#include "mrv/config.hpp"
#include "mrv/dataset.hpp"
#include "mrv/log.hpp"
#include "mrv/pipeline.hpp"
#include "mrv/report.hpp"
#include "mrv/server.hpp"

namespace fs = std::filesystem;
using namespace mrv;

namespace {

volatile std::sig_atomic_t g_stop_requested = 0;
void handle_stop_signal(int) { g_stop_requested = 1; }

// --config is applied before the remaining flags so that flags win
RunConfig prescan_config(int argc, char** argv, RunConfig base) {
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return load_config(argv[i + 1], std::move(base));
    if (arg.rfind("--config=", 0) == 0) return load_config(arg.substr(9), std::move(base));
  }
  return base;
}

struct FlagOverrides {
  std::string codec, perturb, crop;

  void apply(RunConfig& cfg) const {
    if (!codec.empty()) cfg.codec = parse_codec(codec);
    if (!perturb.empty()) cfg.perturb = parse_perturb(perturb);
    if (!crop.empty()) cfg.crop = parse_crop(crop);
  }
};

// common evaluation/serving flags
void add_run_flags(CLI::App* cmd, RunConfig& cfg, FlagOverrides& over) {
  cmd->add_option("--config", "TOML config file (flags override it)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", cfg.seed, "master RNG seed");
  cmd->add_option("--alpha", cfg.alpha, "resolution scaling factor in (0,1]");
  cmd->add_option("--threshold", cfg.threshold, "verification IoU/score threshold");
  cmd->add_option("--method", cfg.method, "iou|psnr|ssim|nrmse|ncc|cosine");
  cmd->add_option("--segmenter", cfg.segmenter, "oracle|adapter");
  cmd->add_option("--adapter-cmd", cfg.adapter_cmd,
                  "external segmenter command ({frame} and {out} placeholders)");
  cmd->add_option("--embedder-cmd", cfg.embedder_cmd,
                  "external embedding command; empty = built-in stub");
  cmd->add_flag("--stub-embeddings", "use the built-in histogram embedding stub (default)");
  cmd->add_option("--codec", over.codec, "lossless | lossy:<1..100>");
  cmd->add_option("--perturb", over.perturb,
                  "oracle degradation, e.g. dilate=2,jitter=2,miss=0.05,seed=1");
  cmd->add_option("--crop", over.crop, "crop region as x,y,w,h (default: full frame)");
  cmd->add_option("--jobs", cfg.jobs, "worker threads (0 = hardware)");
  cmd->add_option("--out", cfg.out_dir, "output directory");
  cmd->add_option("--endpoint", cfg.endpoint, "host:port");
}

std::shared_ptr<Segmenter> make_segmenter(const RunConfig& cfg, const DatasetManifest& manifest) {
  if (cfg.segmenter == "adapter")
    return std::make_shared<ExternalSegmenter>(cfg.adapter_cmd,
                                               fs::path(cfg.out_dir) / "adapter_work");
  return std::make_shared<OracleSegmenter>(load_label_store(manifest), cfg.perturb);
}

std::unique_ptr<Embedder> make_embedder(const RunConfig& cfg) {
  if (!cfg.embedder_cmd.empty())
    return std::make_unique<ExternalEmbedder>(cfg.embedder_cmd,
                                              fs::path(cfg.out_dir) / "embedder_work");
  return std::make_unique<HistogramEmbedder>();
}

PipelineOptions pipeline_options(const RunConfig& cfg, bool roundtrip) {
  PipelineOptions opts;
  opts.alpha = cfg.alpha;
  opts.codec = cfg.codec;
  opts.codec_roundtrip = roundtrip;
  opts.crop = cfg.crop;
  opts.policy = VerificationPolicy{cfg.threshold};
  return opts;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

int cmd_gen_fixtures(const FixtureConfig& cfg, const std::string& out) {
  generate_fixtures(cfg, out);
  std::cout << "wrote " << cfg.count << " annotated fixtures to " << out << "\n";
  return 0;
}

int cmd_gen_dataset(RunConfig cfg, const std::string& sources_dir, const std::string& out) {
  cfg.validate();
  auto sources = load_annotated_dir(sources_dir);
  cfg.dataset.seed = cfg.seed;
  auto built = build_dataset(sources, cfg.dataset, out);
  std::cout << "val:  " << built.val.samples.size() << " samples -> "
            << (fs::path(out) / "manifest_val.json").string() << "\n"
            << "test: " << built.test.samples.size() << " samples -> "
            << (fs::path(out) / "manifest_test.json").string() << "\n";
  return 0;
}

int cmd_evaluate(RunConfig cfg, const std::string& manifest_path, bool roundtrip) {
  cfg.validate();
  auto manifest = load_manifest(manifest_path);
  auto segmenter = make_segmenter(cfg, manifest);
  auto embedder = make_embedder(cfg);
  Method method = parse_method(cfg.method);
  auto results = evaluate_manifest(manifest, segmenter.get(), embedder.get(), method,
                                   pipeline_options(cfg, roundtrip), cfg.jobs);
  auto report = make_report(method, std::move(results), cfg.threshold);

  fs::create_directories(cfg.out_dir);
  write_report_json(report, fs::path(cfg.out_dir) / "report.json");
  write_records_csv(report.records, fs::path(cfg.out_dir) / "records.csv");
  write_curve_csv(report.curve, fs::path(cfg.out_dir) / "curve.csv");
  std::cout << "method=" << method_name(method) << " samples=" << report.records.size()
            << " acc=" << report.rates_at_threshold.acc << " auc=" << report.auc
            << " best_thr=" << report.best_thr << " best_acc=" << report.best_acc << "\n";
  return 0;
}

int cmd_sweep(RunConfig cfg, const std::string& manifest_path) {
  cfg.validate();
  auto manifest = load_manifest(manifest_path);
  auto segmenter = make_segmenter(cfg, manifest);
  auto embedder = make_embedder(cfg);
  Method method = parse_method(cfg.method);
  auto results = evaluate_manifest(manifest, segmenter.get(), embedder.get(), method,
                                   pipeline_options(cfg, false), cfg.jobs);

  std::vector<double> scores;
  std::vector<bool> truths;
  for (const auto& r : results) {
    scores.push_back(r.score);
    truths.push_back(r.ground_truth);
  }
  auto curve = sweep(scores, truths);
  auto [thr, acc] = best_threshold(curve);
  double area = auc(curve);

  fs::create_directories(cfg.out_dir);
  write_curve_csv(curve, fs::path(cfg.out_dir) / "curve.csv");
  nlohmann::json j = {{"method", method_name(method)},
                      {"best_threshold", thr},
                      {"best_acc", acc},
                      {"auc", area},
                      {"samples", results.size()}};
  auto text = j.dump(2);
  write_file(fs::path(cfg.out_dir) / "sweep.json",
             std::vector<uint8_t>(text.begin(), text.end()));
  std::cout << "method=" << method_name(method) << " auc=" << area << " best_thr=" << thr
            << " best_acc=" << acc << "\n";
  return 0;
}

int cmd_serve(RunConfig cfg, const std::string& manifest_path) {
  cfg.validate();
  auto [host, port] = parse_endpoint(cfg.endpoint);
  auto manifest = std::make_shared<DatasetManifest>(load_manifest(manifest_path));
  auto segmenter = make_segmenter(cfg, *manifest);

  ServerConfig sc;
  sc.host = host;
  sc.port = port;
  sc.crop = cfg.crop;
  sc.policy = VerificationPolicy{cfg.threshold};
  EdgeServer server(sc, segmenter, manifest);
  server.start();
  std::cout << "listening on " << host << ":" << server.port() << std::endl;

  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  std::cout << "stopped\n";
  return 0;
}

int cmd_simulate(RunConfig cfg, const std::string& manifest_path, bool fsm, double warp_jitter,
                 int timeout_ms) {
  cfg.validate();
  auto [host, port] = parse_endpoint(cfg.endpoint);
  auto manifest = load_manifest(manifest_path);

  ClientConfig cc;
  cc.host = host;
  cc.port = port;
  cc.alpha = cfg.alpha;
  cc.codec = cfg.codec;
  cc.crop = cfg.crop;
  cc.timeout_ms = timeout_ms;
  cc.fsm_seed = cfg.seed;
  cc.warp_jitter = warp_jitter;

  SessionLog log = fsm ? run_fsm_session(manifest, cc, cfg.skin, cfg.motion)
                       : run_client_session(manifest, cc);

  fs::create_directories(cfg.out_dir);
  write_session_jsonl(log, fs::path(cfg.out_dir) / "session.jsonl");
  write_session_summary_csv(log, fs::path(cfg.out_dir) / "summary.csv");

  std::vector<double> e2e;
  size_t agreed = 0;
  for (const auto& r : log.records) {
    e2e.push_back(r.end_to_end_ms);
    agreed += (r.pass == r.ground_truth) ? 1 : 0;
  }
  std::cout << "steps=" << log.records.size() << " completed=" << (log.completed ? 1 : 0)
            << " mean_e2e_ms=" << mean_of(e2e) << " median_e2e_ms=" << median_of(e2e)
            << " decision_agreement="
            << (log.records.empty() ? 0.0 : double(agreed) / double(log.records.size()))
            << "\n";
  if (!log.completed) {
    std::cerr << "session ended early: " << log.error << "\n";
    return 2;
  }
  return 0;
}

int cmd_bench_codec(RunConfig cfg, const std::string& manifest_path,
                    const std::string& codec_list) {
  cfg.validate();
  auto manifest = load_manifest(manifest_path);
  auto segmenter = make_segmenter(cfg, manifest);

  std::vector<CodecSpec> codecs;
  std::stringstream ss(codec_list);
  std::string item;
  while (std::getline(ss, item, ',')) codecs.push_back(parse_codec(toml::trim(item)));
  if (codecs.empty()) raise(Errc::ConfigInvalid, "no codecs given");

  fs::create_directories(cfg.out_dir);
  std::ostringstream csv;
  csv << "codec,mean_ref_bytes,mean_tgt_bytes,mean_encode_ms,mean_decode_ms,auc,best_acc\n";
  std::cout << "codec            bytes(ref)   bytes(tgt)   enc_ms  dec_ms  auc     best_acc\n";
  for (const auto& codec : codecs) {
    PipelineOptions opts = pipeline_options(cfg, true);
    opts.codec = codec;
    auto results =
        evaluate_manifest(manifest, segmenter.get(), nullptr, Method::Iou, opts, cfg.jobs);
    auto report = make_report(Method::Iou, results, cfg.threshold);
    std::vector<double> rb, tb, enc, dec;
    for (const auto& r : results) {
      rb.push_back(double(r.ref_bytes));
      tb.push_back(double(r.tgt_bytes));
      enc.push_back(r.encode_ms);
      dec.push_back(r.decode_ms);
    }
    csv << codec_to_string(codec) << ',' << mean_of(rb) << ',' << mean_of(tb) << ','
        << mean_of(enc) << ',' << mean_of(dec) << ',' << report.auc << ',' << report.best_acc
        << "\n";
    std::printf("%-16s %-12.0f %-12.0f %-7.2f %-7.2f %-7.4f %-7.4f\n",
                codec_to_string(codec).c_str(), mean_of(rb), mean_of(tb), mean_of(enc),
                mean_of(dec), report.auc, report.best_acc);
  }
  auto text = csv.str();
  write_file(fs::path(cfg.out_dir) / "bench_codec.csv",
             std::vector<uint8_t>(text.begin(), text.end()));
  return 0;
}

int cmd_bench_alpha(RunConfig cfg, const std::string& manifest_path,
                    const std::string& alpha_list) {
  cfg.validate();
  auto manifest = load_manifest(manifest_path);
  auto segmenter = make_segmenter(cfg, manifest);

  std::vector<double> alphas;
  std::stringstream ss(alpha_list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double a = std::stod(toml::trim(item));
    if (!(a > 0.0) || a > 1.0) raise(Errc::ConfigInvalid, "alpha values must lie in (0,1]");
    alphas.push_back(a);
  }
  if (alphas.empty()) raise(Errc::ConfigInvalid, "no alpha values given");

  fs::create_directories(cfg.out_dir);
  std::ostringstream csv;
  csv << "alpha,mean_ref_bytes,mean_tgt_bytes,mean_encode_ms,mean_decode_ms,mean_postproc_ms,"
         "median_pos_iou,median_neg_iou,separation,best_acc\n";
  std::cout << "alpha  bytes(tgt)  enc_ms  pos_iou  neg_iou  gap     best_acc\n";
  for (double a : alphas) {
    PipelineOptions opts = pipeline_options(cfg, true);
    opts.alpha = a;
    auto results =
        evaluate_manifest(manifest, segmenter.get(), nullptr, Method::Iou, opts, cfg.jobs);
    auto report = make_report(Method::Iou, results, cfg.threshold);
    std::vector<double> rb, tb, enc, dec, post, pos, neg;
    for (const auto& r : results) {
      rb.push_back(double(r.ref_bytes));
      tb.push_back(double(r.tgt_bytes));
      enc.push_back(r.encode_ms);
      dec.push_back(r.decode_ms);
      post.push_back(r.postproc_ms);
      (r.ground_truth ? pos : neg).push_back(r.score);
    }
    double gap = median_of(pos) - median_of(neg);
    csv << a << ',' << mean_of(rb) << ',' << mean_of(tb) << ',' << mean_of(enc) << ','
        << mean_of(dec) << ',' << mean_of(post) << ',' << median_of(pos) << ','
        << median_of(neg) << ',' << gap << ',' << report.best_acc << "\n";
    std::printf("%-6.2f %-11.0f %-7.2f %-8.4f %-8.4f %-7.4f %-7.4f\n", a, mean_of(tb),
                mean_of(enc), median_of(pos), median_of(neg), gap, report.best_acc);
  }
  auto text = csv.str();
  write_file(fs::path(cfg.out_dir) / "bench_alpha.csv",
             std::vector<uint8_t>(text.begin(), text.end()));
  return 0;
}

int cmd_report(const std::string& records_path, double threshold) {
  auto [scores, truths] = read_records_csv(records_path);
  auto counts = confusion(scores, truths, threshold);
  auto r = rates_lenient(counts);
  auto curve = sweep(scores, truths);
  auto [thr, acc] = best_threshold(curve);
  std::cout << "samples=" << scores.size() << "\n"
            << "tp=" << counts.tp << " fn=" << counts.fn << " fp=" << counts.fp
            << " tn=" << counts.tn << "\n"
            << "ppv=" << r.ppv << " tpr=" << r.tpr << " fpr=" << r.fpr << " acc=" << r.acc
            << "\n"
            << "auc=" << auc(curve) << " best_thr=" << thr << " best_acc=" << acc << "\n";
  return 0;
}

// Minimal color-outlier segmenter exposing the adapter exchange format; used
// in examples and as a smoke target for --segmenter adapter.
int cmd_stub_segment(const std::string& frame_path, const std::string& out_dir, int class_id,
                     double confidence, int distance) {
  Frame frame = load_frame(frame_path);
  std::vector<uint8_t> r, g, b;
  const size_t n = size_t(frame.width()) * frame.height();
  r.reserve(n);
  g.reserve(n);
  b.reserve(n);
  const uint8_t* p = frame.pixels().data();
  for (size_t i = 0; i < n; ++i, p += 3) {
    r.push_back(p[0]);
    g.push_back(p[1]);
    b.push_back(p[2]);
  }
  auto median_channel = [](std::vector<uint8_t>& v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  int mr = median_channel(r), mg = median_channel(g), mb = median_channel(b);

  Mask mask(frame.width(), frame.height());
  p = frame.pixels().data();
  for (size_t i = 0; i < n; ++i, p += 3) {
    int dist = std::abs(p[0] - mr) + std::abs(p[1] - mg) + std::abs(p[2] - mb);
    mask.bits()[i] = dist > distance ? 1 : 0;
  }

  fs::create_directories(out_dir);
  nlohmann::json index;
  index["candidates"] = nlohmann::json::array();
  if (!mask.empty()) {
    save_mask_png(fs::path(out_dir) / "mask_0.png", mask);
    index["candidates"].push_back(
        {{"class_id", class_id}, {"confidence", confidence}, {"file", "mask_0.png"}});
  }
  auto text = index.dump(2);
  write_file(fs::path(out_dir) / "index.json", std::vector<uint8_t>(text.begin(), text.end()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mrverify - MR operation auto-verification toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  try {
    // ---- gen-fixtures
    auto* gen_fx = app.add_subcommand("gen-fixtures", "synthesize annotated fixture images");
    FixtureConfig fxcfg;
    std::string fx_out;
    gen_fx->add_option("--out", fx_out, "output directory")->required();
    gen_fx->add_option("--count", fxcfg.count, "number of images");
    gen_fx->add_option("--width", fxcfg.width, "image width");
    gen_fx->add_option("--height", fxcfg.height, "image height");
    gen_fx->add_option("--classes", fxcfg.class_count, "number of object classes");
    gen_fx->add_option("--seed", fxcfg.seed, "RNG seed");
    gen_fx->add_option("--min-side", fxcfg.min_side, "minimum brick side");
    gen_fx->add_option("--max-side", fxcfg.max_side, "maximum brick side");
    gen_fx->callback([&] { exit_code = cmd_gen_fixtures(fxcfg, fx_out); });

    // ---- gen-dataset
    auto* gen_ds = app.add_subcommand("gen-dataset",
                                      "build reference/target pairs from annotated sources");
    RunConfig ds_cfg = prescan_config(argc, argv, RunConfig{});
    FlagOverrides ds_over;
    std::string ds_sources, ds_out;
    size_t ds_count = 0;
    gen_ds->add_option("--sources", ds_sources, "directory of annotation JSON + image files")
        ->required();
    gen_ds->add_option("--out", ds_out, "dataset output directory")->required();
    gen_ds->add_option("--count", ds_count, "samples per split (sets val and test)");
    gen_ds->add_option("--val-count", ds_cfg.dataset.val_count, "validation samples");
    gen_ds->add_option("--test-count", ds_cfg.dataset.test_count, "test samples");
    gen_ds->add_option("--seed", ds_cfg.seed, "dataset seed");
    gen_ds->add_option("--config", "TOML config file");
    gen_ds->callback([&] {
      if (ds_count) {
        ds_cfg.dataset.val_count = ds_count;
        ds_cfg.dataset.test_count = ds_count;
      }
      ds_over.apply(ds_cfg);
      exit_code = cmd_gen_dataset(ds_cfg, ds_sources, ds_out);
    });

    // ---- evaluate
    auto* eval = app.add_subcommand("evaluate", "offline verification over a manifest");
    RunConfig ev_cfg = prescan_config(argc, argv, RunConfig{});
    FlagOverrides ev_over;
    std::string ev_manifest;
    bool ev_roundtrip = false;
    eval->add_option("--manifest", ev_manifest, "dataset manifest JSON")->required();
    eval->add_flag("--roundtrip", ev_roundtrip,
                   "push frames through encode+decode like the wire does");
    add_run_flags(eval, ev_cfg, ev_over);
    eval->callback([&] {
      ev_over.apply(ev_cfg);
      exit_code = cmd_evaluate(ev_cfg, ev_manifest, ev_roundtrip);
    });

    // ---- sweep
    auto* sw = app.add_subcommand("sweep", "threshold sweep: ROC/ACC curve and best threshold");
    RunConfig sw_cfg = prescan_config(argc, argv, RunConfig{});
    FlagOverrides sw_over;
    std::string sw_manifest;
    sw->add_option("--manifest", sw_manifest, "dataset manifest JSON")->required();
    add_run_flags(sw, sw_cfg, sw_over);
    sw->callback([&] {
      sw_over.apply(sw_cfg);
      exit_code = cmd_sweep(sw_cfg, sw_manifest);
    });

    // ---- serve
    auto* srv = app.add_subcommand("serve", "run the edge verification server");
    RunConfig srv_cfg = prescan_config(argc, argv, RunConfig{});
    FlagOverrides srv_over;
    std::string srv_manifest;
    srv->add_option("--manifest", srv_manifest,
                    "manifest providing ground-truth labels and step keys")
        ->required();
    add_run_flags(srv, srv_cfg, srv_over);
    srv->callback([&] {
      srv_over.apply(srv_cfg);
      exit_code = cmd_serve(srv_cfg, srv_manifest);
    });

    // ---- simulate
    auto* sim = app.add_subcommand("simulate", "drive a client session against a server");
    RunConfig sim_cfg;
    sim_cfg.alpha = 0.5;  // transport default; evaluate-style commands use 1.0
    sim_cfg = prescan_config(argc, argv, std::move(sim_cfg));
    FlagOverrides sim_over;
    std::string sim_manifest;
    bool sim_fsm = false;
    double sim_warp = 0.0;
    int sim_timeout = 5000;
    sim->add_option("--manifest", sim_manifest, "dataset manifest JSON")->required();
    sim->add_flag("--fsm", sim_fsm, "drive captures through the motion state machine");
    sim->add_option("--warp-jitter", sim_warp, "synthetic camera rotation amplitude (radians)");
    sim->add_option("--timeout-ms", sim_timeout, "per-step reply timeout");
    add_run_flags(sim, sim_cfg, sim_over);
    sim->callback([&] {
      sim_over.apply(sim_cfg);
      exit_code = cmd_simulate(sim_cfg, sim_manifest, sim_fsm, sim_warp, sim_timeout);
    });

    // ---- bench-codec
    auto* bc = app.add_subcommand("bench-codec", "size/latency/accuracy per codec");
    RunConfig bc_cfg = prescan_config(argc, argv, RunConfig{});
    FlagOverrides bc_over;
    std::string bc_manifest, bc_codecs = "lossless,lossy:80,lossy:50";
    bc->add_option("--manifest", bc_manifest, "dataset manifest JSON")->required();
    bc->add_option("--codecs", bc_codecs, "comma-separated codec list");
    add_run_flags(bc, bc_cfg, bc_over);
    bc->callback([&] {
      bc_over.apply(bc_cfg);
      exit_code = cmd_bench_codec(bc_cfg, bc_manifest, bc_codecs);
    });

    // ---- bench-alpha
    auto* ba = app.add_subcommand("bench-alpha", "latency/size/IoU-separation per alpha");
    RunConfig ba_cfg = prescan_config(argc, argv, RunConfig{});
    FlagOverrides ba_over;
    std::string ba_manifest;
    std::string ba_alphas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
    ba->add_option("--manifest", ba_manifest, "dataset manifest JSON")->required();
    ba->add_option("--alphas", ba_alphas, "comma-separated alpha values");
    add_run_flags(ba, ba_cfg, ba_over);
    ba->callback([&] {
      ba_over.apply(ba_cfg);
      exit_code = cmd_bench_alpha(ba_cfg, ba_manifest, ba_alphas);
    });

    // ---- report
    auto* rp = app.add_subcommand("report", "recompute metrics from a records.csv");
    std::string rp_records;
    double rp_threshold = 0.5;
    rp->add_option("--records", rp_records, "records.csv from evaluate")->required();
    rp->add_option("--threshold", rp_threshold, "threshold for the confusion counts");
    rp->callback([&] { exit_code = cmd_report(rp_records, rp_threshold); });

    // ---- stub-segment
    auto* stub = app.add_subcommand(
        "stub-segment", "toy color-outlier segmenter speaking the adapter exchange format");
    std::string stub_frame, stub_out;
    int stub_class = 0, stub_distance = 60;
    double stub_conf = 0.9;
    stub->add_option("frame", stub_frame, "query frame PNG")->required();
    stub->add_option("out", stub_out, "output directory")->required();
    stub->add_option("--class-id", stub_class, "class id to report");
    stub->add_option("--confidence", stub_conf, "confidence to report");
    stub->add_option("--distance", stub_distance, "L1 color distance threshold");
    stub->callback([&] {
      exit_code = cmd_stub_segment(stub_frame, stub_out, stub_class, stub_conf, stub_distance);
    });

    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}
