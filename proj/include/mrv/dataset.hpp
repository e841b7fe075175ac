// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mrv/codec.hpp"
#include "mrv/error.hpp"
#include "mrv/geometry.hpp"
#include "mrv/image.hpp"
#include "mrv/morphology.hpp"
#include "mrv/rng.hpp"
#include "mrv/segmentation.hpp"

namespace mrv {

/// A segmentation-annotated source image: the raw frame plus ground-truth
/// instances (class + mask + tight bbox).
struct AnnotatedImage {
  Frame image;
  std::vector<InstanceLabel> instances;
  std::string source_id;
};

/// The "virtual model look" applied to an instance region when synthesizing
/// reference frames: desaturate, lift brightness, blend a tint on top.
struct OverlayFilter {
  std::array<uint8_t, 3> tint{64, 160, 255};
  double tint_alpha = 0.6;
  int brightness_delta = 20;
  double saturation_scale = 0.8;
};

/// Negative-sample displacement: per-axis magnitude uniform in
/// [lo,hi] x bbox side, random sign, redrawn when in-bounds clamping would
/// shrink it below lo x side.
struct ShiftSpec {
  double lo = 0.5;
  double hi = 1.0;
  int max_attempts = 16;
};

struct GeneratedPair {
  Frame reference;      // source image with the overlay burnt in
  Frame virtual_layer;  // overlay content alone on black
  Mask ref_mask;        // ground-truth reference mask (shifted for negatives)
  int step_class = 0;
  bool ground_truth = true;
  std::vector<Point2> alignment_points;
};

namespace detail {

inline void apply_overlay_pixel(const OverlayFilter& f, const uint8_t* in, uint8_t* out) {
  double g = luma(in);
  for (int c = 0; c < 3; ++c) {
    double v = g + f.saturation_scale * (static_cast<double>(in[c]) - g);
    v += f.brightness_delta;
    v = std::clamp(v, 0.0, 255.0);
    v = (1.0 - f.tint_alpha) * v + f.tint_alpha * f.tint[c];
    out[c] = static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
  }
  // the virtual layer must survive the binary filter, so overlay output is
  // never pure black
  if (out[0] == 0 && out[1] == 0 && out[2] == 0) out[0] = out[1] = out[2] = 1;
}

// corners plus edge midpoints of the placed virtual unit; these mimic the
// tag-plane sample points the client would take from rendered geometry.
// count is clamped to [4,8]: corners first, then midpoints.
inline std::vector<Point2> bbox_sample_points(const Region& r, size_t count) {
  double x0 = r.x, y0 = r.y;
  double x1 = r.x + r.w - 1.0, y1 = r.y + r.h - 1.0;
  double xm = (x0 + x1) / 2.0, ym = (y0 + y1) / 2.0;
  std::vector<Point2> all{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1},
                          {xm, y0}, {x1, ym}, {xm, y1}, {x0, ym}};
  all.resize(std::clamp<size_t>(count, 4, all.size()));
  return all;
}

inline bool is_exact_rectangle(const InstanceLabel& inst) {
  return inst.mask.count() == static_cast<size_t>(inst.bbox.w) * inst.bbox.h;
}

}  // namespace detail

/// Builds one reference/target pair from an annotated source. The target is
/// the untouched source image; the reference gets the filtered instance
/// appearance overlaid at the original (positive) or shifted (negative)
/// location. Deterministic in rng_seed.
inline GeneratedPair generate_pair(const AnnotatedImage& src, size_t instance_index, bool polarity,
                                   const OverlayFilter& filter, const ShiftSpec& shift,
                                   uint64_t rng_seed, size_t alignment_point_count = 8) {
  if (instance_index >= src.instances.size())
    raise(Errc::InstanceNotInImage, "instance index out of range for " + src.source_id);
  const InstanceLabel& inst = src.instances[instance_index];
  const uint32_t W = src.image.width(), H = src.image.height();
  if (inst.mask.width() != W || inst.mask.height() != H)
    raise(Errc::InstanceNotInImage, "instance mask dimensions differ from image");

  Rng rng(rng_seed);
  int dx = 0, dy = 0;
  if (!polarity) {
    const Region& bb = inst.bbox;
    const int lo_dx = -static_cast<int>(bb.x);
    const int hi_dx = static_cast<int>(W - bb.w - bb.x);
    const int lo_dy = -static_cast<int>(bb.y);
    const int hi_dy = static_cast<int>(H - bb.h - bb.y);
    bool ok = false;
    for (int attempt = 0; attempt < shift.max_attempts && !ok; ++attempt) {
      double mx = rng.uniform(shift.lo, shift.hi) * bb.w;
      double my = rng.uniform(shift.lo, shift.hi) * bb.h;
      int cx = static_cast<int>(std::lround(rng.chance(0.5) ? mx : -mx));
      int cy = static_cast<int>(std::lround(rng.chance(0.5) ? my : -my));
      cx = std::clamp(cx, lo_dx, hi_dx);
      cy = std::clamp(cy, lo_dy, hi_dy);
      if (std::abs(cx) >= shift.lo * bb.w && std::abs(cy) >= shift.lo * bb.h) {
        dx = cx;
        dy = cy;
        ok = true;
      }
    }
    if (!ok)
      raise(Errc::UnshiftableInstance,
            "no in-bounds shift >= " + std::to_string(shift.lo) + "x side exists for " +
                src.source_id + " instance " + std::to_string(instance_index));
  }

  GeneratedPair out;
  out.step_class = inst.class_id;
  out.ground_truth = polarity;
  out.reference = src.image;
  out.virtual_layer = Frame(W, H);
  out.ref_mask = (dx == 0 && dy == 0) ? inst.mask : translate(inst.mask, dx, dy);

  // the processed instance appearance lands at the (possibly shifted) spot
  for (uint32_t y = 0; y < H; ++y) {
    for (uint32_t x = 0; x < W; ++x) {
      if (!inst.mask.at(x, y)) continue;
      uint32_t tx = static_cast<uint32_t>(static_cast<int>(x) + dx);
      uint32_t ty = static_cast<uint32_t>(static_cast<int>(y) + dy);
      uint8_t px[3];
      detail::apply_overlay_pixel(filter, src.image.at(x, y), px);
      out.reference.set(tx, ty, px[0], px[1], px[2]);
      out.virtual_layer.set(tx, ty, px[0], px[1], px[2]);
    }
  }

  Region placed{inst.bbox.x + static_cast<uint32_t>(dx), inst.bbox.y + static_cast<uint32_t>(dy),
                inst.bbox.w, inst.bbox.h};
  out.alignment_points = detail::bbox_sample_points(placed, alignment_point_count);

  // generator invariant: rectangle-like instances shifted >= 0.5x side per
  // axis can never overlap the original beyond IoU 1/3
  if (!polarity && detail::is_exact_rectangle(inst)) {
    double v = iou(out.ref_mask, inst.mask);
    if (v > 1.0 / 3.0 + 1e-9)
      throw std::logic_error("negative-pair IoU bound violated: " + std::to_string(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifests

struct SampleRef {
  std::string id;
  uint32_t step_index = 0;
  int step_class = 0;
  bool ground_truth = true;
  std::string source_id;
  std::string reference, virtual_layer, ref_mask, target;  // paths relative to manifest
  std::vector<Point2> alignment_points;
  uint32_t width = 0, height = 0;
  std::map<std::string, uint32_t> crc;  // role -> CRC-32 of file bytes
};

struct SourceRef {
  std::string image;   // relative path
  std::string labels;  // relative path to the label index JSON
  uint32_t image_crc = 0;
};

struct DatasetManifest {
  std::string name;
  std::string split;  // "val" or "test"
  uint64_t seed = 0;
  int class_count = 0;
  std::map<std::string, SourceRef> sources;
  std::vector<SampleRef> samples;
  std::filesystem::path root;  // directory containing the manifest file

  std::filesystem::path resolve(const std::string& rel) const { return root / rel; }
};

inline uint32_t crc32_of(const std::vector<uint8_t>& bytes) {
  return static_cast<uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

namespace detail {

inline std::pair<uint32_t, uint32_t> png_peek_dims(const std::vector<uint8_t>& bytes) {
  static const uint8_t sig[8] = {0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a};
  if (bytes.size() < 24 || std::memcmp(bytes.data(), sig, 8) != 0)
    raise(Errc::CorruptStream, "not a PNG stream");
  auto be32 = [&](size_t off) {
    return (uint32_t(bytes[off]) << 24) | (uint32_t(bytes[off + 1]) << 16) |
           (uint32_t(bytes[off + 2]) << 8) | uint32_t(bytes[off + 3]);
  };
  return {be32(16), be32(20)};
}

inline nlohmann::json points_to_json(const std::vector<Point2>& pts) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : pts) a.push_back({p.x, p.y});
  return a;
}

inline std::vector<Point2> points_from_json(const nlohmann::json& a) {
  std::vector<Point2> pts;
  for (const auto& e : a) pts.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  return pts;
}

}  // namespace detail

inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["name"] = m.name;
  j["split"] = m.split;
  j["seed"] = m.seed;
  j["class_count"] = m.class_count;
  nlohmann::json srcs = nlohmann::json::object();
  for (const auto& [sid, ref] : m.sources)
    srcs[sid] = {{"image", ref.image}, {"labels", ref.labels}, {"image_crc", ref.image_crc}};
  j["sources"] = srcs;
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : m.samples) {
    nlohmann::json js = {{"id", s.id},
                         {"step_index", s.step_index},
                         {"step_class", s.step_class},
                         {"ground_truth", s.ground_truth},
                         {"source_id", s.source_id},
                         {"reference", s.reference},
                         {"virtual_layer", s.virtual_layer},
                         {"ref_mask", s.ref_mask},
                         {"target", s.target},
                         {"alignment_points", detail::points_to_json(s.alignment_points)},
                         {"width", s.width},
                         {"height", s.height},
                         {"crc", s.crc}};
    samples.push_back(std::move(js));
  }
  j["samples"] = samples;
  auto text = j.dump(2);
  write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
}

/// Parses and fully validates a manifest: every referenced file must exist,
/// match its recorded CRC-32 and (for sample rasters) its recorded
/// dimensions.
inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    raise(Errc::MissingFile, "manifest not found: " + path.string());
  DatasetManifest m;
  m.root = path.parent_path();
  nlohmann::json j;
  try {
    auto raw = read_file(path);
    j = nlohmann::json::parse(raw.begin(), raw.end());
    m.name = j.at("name").get<std::string>();
    m.split = j.at("split").get<std::string>();
    m.seed = j.at("seed").get<uint64_t>();
    m.class_count = j.at("class_count").get<int>();
    for (const auto& [sid, js] : j.at("sources").items()) {
      m.sources[sid] = SourceRef{js.at("image").get<std::string>(),
                                 js.at("labels").get<std::string>(),
                                 js.at("image_crc").get<uint32_t>()};
    }
    for (const auto& js : j.at("samples")) {
      SampleRef s;
      s.id = js.at("id").get<std::string>();
      s.step_index = js.at("step_index").get<uint32_t>();
      s.step_class = js.at("step_class").get<int>();
      s.ground_truth = js.at("ground_truth").get<bool>();
      s.source_id = js.at("source_id").get<std::string>();
      s.reference = js.at("reference").get<std::string>();
      s.virtual_layer = js.at("virtual_layer").get<std::string>();
      s.ref_mask = js.at("ref_mask").get<std::string>();
      s.target = js.at("target").get<std::string>();
      s.alignment_points = detail::points_from_json(js.at("alignment_points"));
      s.width = js.at("width").get<uint32_t>();
      s.height = js.at("height").get<uint32_t>();
      for (const auto& [role, v] : js.at("crc").items()) s.crc[role] = v.get<uint32_t>();
      m.samples.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::ManifestCorrupt, std::string("manifest parse failed: ") + e.what());
  }

  // integrity pass: existence, checksum, recorded dimensions
  auto check = [&](const std::string& owner, const std::string& role, const std::string& rel,
                   uint32_t want_crc, uint32_t want_w, uint32_t want_h) {
    auto full = m.resolve(rel);
    if (!std::filesystem::exists(full))
      raise(Errc::MissingFile, owner + ": missing " + role + " file " + rel);
    auto bytes = read_file(full);
    if (crc32_of(bytes) != want_crc)
      raise(Errc::ChecksumMismatch, owner + ": checksum mismatch on " + rel);
    if (want_w != 0) {
      auto [w, h] = detail::png_peek_dims(bytes);
      if (w != want_w || h != want_h)
        raise(Errc::ManifestCorrupt, owner + ": " + rel + " dimensions differ from manifest");
    }
  };
  std::set<std::string> checked;  // targets repeat across samples
  for (const auto& s : m.samples) {
    for (const auto& [role, rel] :
         std::initializer_list<std::pair<std::string, std::string>>{
             {"reference", s.reference},
             {"virtual_layer", s.virtual_layer},
             {"ref_mask", s.ref_mask},
             {"target", s.target}}) {
      auto it = s.crc.find(role);
      if (it == s.crc.end()) raise(Errc::ManifestCorrupt, s.id + ": no checksum for " + role);
      if (checked.insert(rel).second) check(s.id, role, rel, it->second, s.width, s.height);
    }
  }
  for (const auto& [sid, ref] : m.sources) {
    if (checked.insert(ref.image).second) check(sid, "image", ref.image, ref.image_crc, 0, 0);
    if (!std::filesystem::exists(m.resolve(ref.labels)))
      raise(Errc::MissingFile, sid + ": missing labels file " + ref.labels);
  }
  return m;
}

/// Loads ground-truth instances for every source in the manifest, keyed by
/// source id. This is what the oracle segmenter is constructed from.
inline LabelStore load_label_store(const DatasetManifest& m) {
  LabelStore store;
  for (const auto& [sid, ref] : m.sources) {
    auto raw = read_file(m.resolve(ref.labels));
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw.begin(), raw.end());
      std::vector<InstanceLabel> labels;
      for (const auto& inst : j.at("instances")) {
        Mask mask = load_mask(m.resolve(inst.at("mask").get<std::string>()));
        labels.push_back(make_instance(inst.at("class_id").get<int>(), std::move(mask)));
      }
      store[sid] = std::move(labels);
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::ManifestCorrupt, sid + ": labels parse failed: " + e.what());
    }
  }
  return store;
}

// ---------------------------------------------------------------------------
// Dataset construction

struct DatasetConfig {
  std::string name = "desk";
  uint64_t seed = 7;
  size_t val_count = 200;
  size_t test_count = 200;
  OverlayFilter filter;
  ShiftSpec shift;
  size_t alignment_point_count = 8;  // tag-plane sample points per pair, 4..8
};

struct BuiltDataset {
  DatasetManifest val;
  DatasetManifest test;
};

namespace detail {

struct PoolEntry {
  size_t source = 0;
  size_t instance = 0;
};

// Balanced positive/negative halves, stratified round-robin over classes.
inline std::vector<std::pair<PoolEntry, bool>> plan_samples(
    const std::vector<AnnotatedImage>& sources, size_t count, uint64_t seed) {
  std::map<int, std::vector<PoolEntry>> by_class;
  for (size_t s = 0; s < sources.size(); ++s)
    for (size_t i = 0; i < sources[s].instances.size(); ++i)
      by_class[sources[s].instances[i].class_id].push_back({s, i});

  std::vector<int> classes;
  for (auto& [cls, entries] : by_class) {
    classes.push_back(cls);
    // deterministic shuffle
    Rng rng(derive_seed(seed, 0x706c616eull, static_cast<uint64_t>(cls)));
    for (size_t i = entries.size(); i > 1; --i)
      std::swap(entries[i - 1], entries[rng.below(i)]);
  }

  std::map<int, size_t> cursor;
  auto draw = [&](size_t k) {
    int cls = classes[k % classes.size()];
    auto& entries = by_class[cls];
    PoolEntry e = entries[cursor[cls] % entries.size()];
    ++cursor[cls];
    return e;
  };

  std::vector<std::pair<PoolEntry, bool>> plan;
  plan.reserve(count);
  size_t positives = (count + 1) / 2;
  for (size_t k = 0; k < count; ++k) plan.emplace_back(draw(k), k < positives);
  return plan;
}

inline uint32_t write_with_crc(const std::filesystem::path& path,
                               const std::vector<uint8_t>& bytes) {
  write_file(path, bytes);
  return crc32_of(bytes);
}

}  // namespace detail

/// Generates one split: writes sample rasters plus the manifest file and
/// returns the loaded-equivalent manifest. Pure function of
/// (sources, config, seed, split).
inline DatasetManifest build_split(const std::vector<AnnotatedImage>& sources,
                                   const DatasetConfig& config, const std::string& split,
                                   size_t count, const std::filesystem::path& out_dir,
                                   const std::map<std::string, SourceRef>& source_refs,
                                   const std::map<std::string, uint32_t>& source_crcs) {
  DatasetManifest m;
  m.name = config.name;
  m.split = split;
  m.seed = config.seed;
  m.root = out_dir;
  m.sources = source_refs;
  std::set<int> classes;
  for (const auto& s : sources)
    for (const auto& i : s.instances) classes.insert(i.class_id);
  m.class_count = static_cast<int>(classes.size());

  auto plan = detail::plan_samples(sources, count, derive_seed(config.seed, fnv1a64(split)));
  std::filesystem::create_directories(out_dir / split);
  m.samples.resize(plan.size());

  // sample generation is independent per index (seeds are index-derived),
  // so fan out across cores; the manifest is assembled in index order
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mu;
  auto worker = [&]() {
    for (;;) {
      size_t k = next.fetch_add(1);
      if (k >= plan.size() || failed.load()) return;
      try {
        const auto& [entry, polarity] = plan[k];
        const AnnotatedImage& src = sources[entry.source];
        uint64_t pair_seed = derive_seed(config.seed, fnv1a64(split), k);
        GeneratedPair pair = generate_pair(src, entry.instance, polarity, config.filter,
                                           config.shift, pair_seed,
                                           config.alignment_point_count);

        char idbuf[32];
        std::snprintf(idbuf, sizeof idbuf, "%s_%04zu", split.c_str(), k);
        SampleRef ref;
        ref.id = idbuf;
        ref.step_index = static_cast<uint32_t>(k);
        ref.step_class = pair.step_class;
        ref.ground_truth = pair.ground_truth;
        ref.source_id = src.source_id;
        ref.width = src.image.width();
        ref.height = src.image.height();
        ref.alignment_points = pair.alignment_points;
        ref.reference = split + "/" + ref.id + "_ref.png";
        ref.virtual_layer = split + "/" + ref.id + "_virt.png";
        ref.ref_mask = split + "/" + ref.id + "_mask.png";
        ref.target = source_refs.at(src.source_id).image;

        ref.crc["reference"] = detail::write_with_crc(
            out_dir / ref.reference, encode(pair.reference, CodecSpec::lossless()));
        ref.crc["virtual_layer"] = detail::write_with_crc(
            out_dir / ref.virtual_layer, encode(pair.virtual_layer, CodecSpec::lossless()));
        ref.crc["ref_mask"] =
            detail::write_with_crc(out_dir / ref.ref_mask, encode_mask_png(pair.ref_mask));
        ref.crc["target"] = source_crcs.at(src.source_id);
        m.samples[k] = std::move(ref);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, plan.empty() ? 1 : static_cast<unsigned>(plan.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load()) {
    // surface UnshiftableInstance and friends with their original code
    if (first_error.rfind(errc_name(Errc::UnshiftableInstance), 0) == 0)
      raise(Errc::UnshiftableInstance, first_error);
    raise(Errc::IoFailure, "dataset generation failed: " + first_error);
  }
  save_manifest(m, out_dir / ("manifest_" + split + ".json"));
  return m;
}

/// Builds balanced val/test splits under out_dir, writing source images,
/// label indices, per-sample rasters and both manifests.
inline BuiltDataset build_dataset(const std::vector<AnnotatedImage>& sources,
                                  const DatasetConfig& config,
                                  const std::filesystem::path& out_dir) {
  if (sources.empty()) raise(Errc::InsufficientSources, "no annotated source images");
  for (const auto& s : sources)
    if (s.instances.empty())
      raise(Errc::InsufficientSources, "source " + s.source_id + " has no instances");

  std::filesystem::create_directories(out_dir / "sources");
  std::map<std::string, SourceRef> source_refs;
  std::map<std::string, uint32_t> source_crcs;
  for (const auto& s : sources) {
    SourceRef ref;
    ref.image = "sources/" + s.source_id + ".png";
    ref.labels = "sources/" + s.source_id + "_labels.json";
    ref.image_crc =
        detail::write_with_crc(out_dir / ref.image, encode(s.image, CodecSpec::lossless()));
    source_crcs[s.source_id] = ref.image_crc;

    nlohmann::json labels;
    labels["source_id"] = s.source_id;
    labels["width"] = s.image.width();
    labels["height"] = s.image.height();
    nlohmann::json insts = nlohmann::json::array();
    for (size_t i = 0; i < s.instances.size(); ++i) {
      std::string mask_rel = "sources/" + s.source_id + "_inst" + std::to_string(i) + ".png";
      write_file(out_dir / mask_rel, encode_mask_png(s.instances[i].mask));
      insts.push_back({{"class_id", s.instances[i].class_id}, {"mask", mask_rel}});
    }
    labels["instances"] = insts;
    auto text = labels.dump(2);
    write_file(out_dir / ref.labels, std::vector<uint8_t>(text.begin(), text.end()));
    source_refs[s.source_id] = std::move(ref);
  }

  BuiltDataset out;
  out.val = build_split(sources, config, "val", config.val_count, out_dir, source_refs,
                        source_crcs);
  out.test = build_split(sources, config, "test", config.test_count, out_dir, source_refs,
                         source_crcs);
  return out;
}

// ---------------------------------------------------------------------------
// Polygon-annotation ingestion

/// Even-odd scanline rasterization at pixel centres.
inline Mask rasterize_polygon(const std::vector<Point2>& poly, uint32_t w, uint32_t h) {
  Mask out(w, h);
  if (poly.size() < 3) return out;
  for (uint32_t y = 0; y < h; ++y) {
    double cy = y + 0.5;
    std::vector<double> xs;
    for (size_t i = 0; i < poly.size(); ++i) {
      const Point2& a = poly[i];
      const Point2& b = poly[(i + 1) % poly.size()];
      if ((a.y <= cy) == (b.y <= cy)) continue;
      xs.push_back(a.x + (cy - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (size_t k = 0; k + 1 < xs.size(); k += 2) {
      int64_t x_first = static_cast<int64_t>(std::ceil(xs[k] - 0.5));
      int64_t x_last = static_cast<int64_t>(std::ceil(xs[k + 1] - 0.5)) - 1;
      x_first = std::max<int64_t>(x_first, 0);
      x_last = std::min<int64_t>(x_last, static_cast<int64_t>(w) - 1);
      for (int64_t x = x_first; x <= x_last; ++x)
        out.set(static_cast<uint32_t>(x), y, 1);
    }
  }
  return out;
}

/// Loads one polygon-style annotation export: a JSON file
/// {"source_id","image","width","height","instances":[{"class_id","polygon":
/// [[x,y],...]}]} with the image path relative to the JSON file.
inline AnnotatedImage load_annotated_image(const std::filesystem::path& json_path) {
  auto raw = read_file(json_path);
  AnnotatedImage out;
  try {
    nlohmann::json j = nlohmann::json::parse(raw.begin(), raw.end());
    out.source_id = j.at("source_id").get<std::string>();
    out.image = load_frame(json_path.parent_path() / j.at("image").get<std::string>());
    uint32_t w = j.at("width").get<uint32_t>(), h = j.at("height").get<uint32_t>();
    if (w != out.image.width() || h != out.image.height())
      raise(Errc::ManifestCorrupt, json_path.string() + ": image dimensions differ");
    for (const auto& inst : j.at("instances")) {
      Mask mask = rasterize_polygon(detail::points_from_json(inst.at("polygon")), w, h);
      out.instances.push_back(make_instance(inst.at("class_id").get<int>(), std::move(mask)));
    }
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::ManifestCorrupt, json_path.string() + ": " + e.what());
  }
  return out;
}

inline std::vector<AnnotatedImage> load_annotated_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    raise(Errc::MissingFile, "annotation directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<AnnotatedImage> out;
  for (const auto& f : files) out.push_back(load_annotated_image(f));
  if (out.empty()) raise(Errc::InsufficientSources, "no annotation files in " + dir.string());
  return out;
}

// ---------------------------------------------------------------------------
// Procedural fixtures

struct FixtureConfig {
  size_t count = 24;
  uint32_t width = 640, height = 640;
  int class_count = 8;
  uint64_t seed = 11;
  uint32_t min_side = 40, max_side = 140;
  size_t min_instances = 3, max_instances = 6;
};

namespace detail {

inline std::array<uint8_t, 3> class_color(int cls) {
  static const std::array<uint8_t, 3> palette[] = {
      {200, 60, 50},  {60, 170, 80},  {70, 90, 200},  {210, 180, 60},
      {170, 70, 190}, {60, 190, 190}, {220, 120, 40}, {120, 200, 70},
      {190, 90, 120}, {90, 130, 170}, {150, 150, 90}, {100, 80, 60},
  };
  return palette[static_cast<size_t>(cls) % std::size(palette)];
}

// lattice value noise with bilinear interpolation between cells
inline Frame textured_background(uint32_t w, uint32_t h, Rng& rng) {
  const uint32_t cell = 16;
  const uint32_t gw = w / cell + 2, gh = h / cell + 2;
  std::vector<double> lattice(static_cast<size_t>(gw) * gh);
  for (auto& v : lattice) v = rng.uniform(-24.0, 24.0);

  std::array<double, 3> c0{70, 80, 95}, c1{150, 135, 115};
  Frame f(w, h);
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      double gx = static_cast<double>(x) / cell, gy = static_cast<double>(y) / cell;
      uint32_t x0 = static_cast<uint32_t>(gx), y0 = static_cast<uint32_t>(gy);
      double fx = gx - x0, fy = gy - y0;
      double n = (1 - fy) * ((1 - fx) * lattice[y0 * gw + x0] + fx * lattice[y0 * gw + x0 + 1]) +
                 fy * ((1 - fx) * lattice[(y0 + 1) * gw + x0] + fx * lattice[(y0 + 1) * gw + x0 + 1]);
      double tx = static_cast<double>(x) / w, ty = static_cast<double>(y) / h;
      uint8_t px[3];
      for (int c = 0; c < 3; ++c) {
        double base = c0[c] + (c1[c] - c0[c]) * (tx + ty) / 2.0;
        double dither = rng.uniform(-6.0, 6.0);
        px[c] = static_cast<uint8_t>(std::lround(std::clamp(base + n + dither, 0.0, 255.0)));
      }
      f.set(x, y, px[0], px[1], px[2]);
    }
  }
  return f;
}

}  // namespace detail

/// Synthesizes annotated fixture images: textured background plus a handful
/// of non-overlapping class-colored rectangles, written as PNG + polygon
/// annotation JSON pairs that the ingestion path can read back.
inline void generate_fixtures(const FixtureConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (size_t img = 0; img < cfg.count; ++img) {
    Rng rng(derive_seed(cfg.seed, 0x66697874ull, img));
    Frame frame = detail::textured_background(cfg.width, cfg.height, rng);

    size_t want = cfg.min_instances + rng.below(cfg.max_instances - cfg.min_instances + 1);
    std::vector<Region> placed;
    nlohmann::json insts = nlohmann::json::array();
    for (size_t k = 0; k < want; ++k) {
      uint32_t rw = cfg.min_side + static_cast<uint32_t>(rng.below(cfg.max_side - cfg.min_side));
      uint32_t rh = cfg.min_side + static_cast<uint32_t>(rng.below(cfg.max_side - cfg.min_side));
      bool ok = false;
      Region r{};
      for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
        r = Region{static_cast<uint32_t>(rng.below(cfg.width - rw)),
                   static_cast<uint32_t>(rng.below(cfg.height - rh)), rw, rh};
        ok = true;
        for (const auto& p : placed) {
          bool apart = r.x + r.w + 6 <= p.x || p.x + p.w + 6 <= r.x || r.y + r.h + 6 <= p.y ||
                       p.y + p.h + 6 <= r.y;
          if (!apart) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) continue;  // crowded image; place fewer bricks
      placed.push_back(r);

      int cls = static_cast<int>(rng.below(static_cast<uint64_t>(cfg.class_count)));
      auto color = detail::class_color(cls);
      for (uint32_t y = r.y; y < r.y + r.h; ++y)
        for (uint32_t x = r.x; x < r.x + r.w; ++x) {
          uint8_t px[3];
          for (int c = 0; c < 3; ++c) {
            double v = color[c] + rng.uniform(-10.0, 10.0);
            px[c] = static_cast<uint8_t>(std::lround(std::clamp(v, 1.0, 255.0)));
          }
          frame.set(x, y, px[0], px[1], px[2]);
        }
      double x0 = r.x, y0 = r.y, x1 = r.x + r.w, y1 = r.y + r.h;
      insts.push_back({{"class_id", cls},
                       {"polygon", {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}}});
    }

    char name[32];
    std::snprintf(name, sizeof name, "fixture_%03zu", img);
    save_frame_png(out_dir / (std::string(name) + ".png"), frame);
    nlohmann::json j;
    j["source_id"] = name;
    j["image"] = std::string(name) + ".png";
    j["width"] = cfg.width;
    j["height"] = cfg.height;
    j["instances"] = insts;
    auto text = j.dump(2);
    write_file(out_dir / (std::string(name) + ".json"),
               std::vector<uint8_t>(text.begin(), text.end()));
  }
}

}  // namespace mrv
