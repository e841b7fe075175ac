// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "mrv/codec.hpp"
#include "mrv/dataset.hpp"
#include "mrv/error.hpp"
#include "mrv/motion.hpp"
#include "mrv/net.hpp"
#include "mrv/segmentation.hpp"

namespace mrv {

// Minimal TOML subset: comments, [section] tables one level deep, and
// key = value with strings, integers, floats and booleans. That covers the
// run-config format; anything fancier is rejected loudly.
namespace toml {

using Value = std::variant<int64_t, double, bool, std::string>;
using Table = std::map<std::string, Value>;  // keys are "section.key"

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline Value parse_value(const std::string& raw, int line_no) {
  std::string v = trim(raw);
  if (v.empty()) raise(Errc::ConfigInvalid, "empty value at line " + std::to_string(line_no));
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      raise(Errc::ConfigInvalid, "unterminated string at line " + std::to_string(line_no));
    return v.substr(1, v.size() - 2);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  // integer, then float
  {
    int64_t iv = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), iv);
    if (ec == std::errc() && p == v.data() + v.size()) return iv;
  }
  try {
    size_t used = 0;
    double dv = std::stod(v, &used);
    if (used == v.size()) return dv;
  } catch (...) {
  }
  raise(Errc::ConfigInvalid, "cannot parse value '" + v + "' at line " + std::to_string(line_no));
}

inline Table parse(const std::string& text) {
  Table out;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        raise(Errc::ConfigInvalid, "malformed section at line " + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        raise(Errc::ConfigInvalid, "empty section name at line " + std::to_string(line_no));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(Errc::ConfigInvalid, "expected key = value at line " + std::to_string(line_no));
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      raise(Errc::ConfigInvalid, "empty key at line " + std::to_string(line_no));
    std::string full = section.empty() ? key : section + "." + key;
    if (out.count(full))
      raise(Errc::ConfigInvalid, "duplicate key '" + full + "' at line " + std::to_string(line_no));
    out[full] = parse_value(line.substr(eq + 1), line_no);
  }
  return out;
}

inline Table parse_file(const std::filesystem::path& path) {
  auto raw = read_file(path);
  return parse(std::string(raw.begin(), raw.end()));
}

}  // namespace toml

inline CodecSpec parse_codec(const std::string& s) {
  if (s == "lossless") return CodecSpec::lossless();
  if (s.rfind("lossy:", 0) == 0) {
    try {
      return CodecSpec::lossy(std::stoi(s.substr(6)));
    } catch (const Error&) {
      throw;
    } catch (...) {
    }
  }
  raise(Errc::ConfigInvalid, "codec must be 'lossless' or 'lossy:<1..100>', got '" + s + "'");
}

inline std::string codec_to_string(const CodecSpec& c) {
  return c.is_lossless() ? "lossless" : "lossy:" + std::to_string(c.quality);
}

/// "dilate=2,jitter=2.0,miss=0.05,spurious=0,seed=1"; omitted fields keep
/// their defaults.
inline PerturbationSpec parse_perturb(const std::string& s) {
  PerturbationSpec spec;
  if (s.empty()) return spec;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      raise(Errc::ConfigInvalid, "perturb spec items must be key=value, got '" + item + "'");
    std::string key = toml::trim(item.substr(0, eq));
    std::string val = toml::trim(item.substr(eq + 1));
    try {
      if (key == "dilate")
        spec.dilate_erode_radius = std::stoi(val);
      else if (key == "jitter")
        spec.jitter_sigma = std::stod(val);
      else if (key == "miss")
        spec.miss_rate = std::stod(val);
      else if (key == "spurious")
        spec.spurious_rate = std::stod(val);
      else if (key == "seed")
        spec.seed = std::stoull(val);
      else
        raise(Errc::ConfigInvalid, "unknown perturb key '" + key + "'");
    } catch (const Error&) {
      throw;
    } catch (...) {
      raise(Errc::ConfigInvalid, "bad perturb value '" + item + "'");
    }
  }
  if (spec.miss_rate < 0 || spec.miss_rate > 1 || spec.spurious_rate < 0 ||
      spec.spurious_rate > 1)
    raise(Errc::ConfigInvalid, "perturb rates must lie in [0,1]");
  return spec;
}

inline Region parse_crop(const std::string& s) {
  Region r{};
  if (s.empty()) return r;
  unsigned vals[4];
  std::stringstream ss(s);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',') && i < 4) {
    try {
      vals[i++] = static_cast<unsigned>(std::stoul(toml::trim(item)));
    } catch (...) {
      raise(Errc::ConfigInvalid, "crop must be x,y,w,h");
    }
  }
  if (i != 4) raise(Errc::ConfigInvalid, "crop must be x,y,w,h");
  return Region{vals[0], vals[1], vals[2], vals[3]};
}

/// Everything a command run needs, assembled from defaults, an optional TOML
/// file and command-line overrides (flags win).
struct RunConfig {
  uint64_t seed = 7;
  double alpha = 1.0;
  double threshold = 0.5;
  std::string method = "iou";
  std::string segmenter = "oracle";  // oracle | adapter
  std::string adapter_cmd;
  std::string embedder_cmd;  // empty = histogram stub
  std::string endpoint = "127.0.0.1:9400";
  int jobs = 0;
  std::string out_dir = "out";
  CodecSpec codec = CodecSpec::lossless();
  Region crop{};
  PerturbationSpec perturb;
  SkinModel skin;
  MotionConfig motion;
  DatasetConfig dataset;

  void validate() const {
    if (!(alpha > 0.0) || alpha > 1.0)
      raise(Errc::ConfigInvalid, "alpha must lie in (0,1]");
    if (threshold < 0.0 || threshold > 1.0)
      raise(Errc::ConfigInvalid, "threshold must lie in [0,1]");
    if (segmenter != "oracle" && segmenter != "adapter")
      raise(Errc::ConfigInvalid, "segmenter must be 'oracle' or 'adapter'");
    if (segmenter == "adapter" && adapter_cmd.empty())
      raise(Errc::ConfigInvalid, "adapter segmenter needs adapter_cmd");
    bool method_known = false;
    for (const char* m : {"iou", "psnr", "ssim", "nrmse", "ncc", "cosine"})
      method_known = method_known || method == m;
    if (!method_known) raise(Errc::ConfigInvalid, "unknown method '" + method + "'");
    parse_endpoint(endpoint);
    if (jobs < 0) raise(Errc::ConfigInvalid, "jobs must be >= 0");
    if (perturb.miss_rate < 0 || perturb.miss_rate > 1)
      raise(Errc::ConfigInvalid, "perturb.miss_rate must lie in [0,1]");
    if (perturb.spurious_rate < 0 || perturb.spurious_rate > 1)
      raise(Errc::ConfigInvalid, "perturb.spurious_rate must lie in [0,1]");
    if (!(motion.min_threshold <= motion.base_threshold &&
          motion.base_threshold <= motion.max_threshold))
      raise(Errc::ConfigInvalid, "motion thresholds must satisfy min <= base <= max");
    if (motion.capture_period_ms == 0)
      raise(Errc::ConfigInvalid, "motion.capture_period_ms must be positive");
    if (!(dataset.shift.lo > 0.0) || dataset.shift.lo > dataset.shift.hi)
      raise(Errc::ConfigInvalid, "dataset shift must satisfy 0 < lo <= hi");
    if (dataset.filter.tint_alpha < 0 || dataset.filter.tint_alpha > 1)
      raise(Errc::ConfigInvalid, "dataset.tint_alpha must lie in [0,1]");
    if (dataset.alignment_point_count < 4 || dataset.alignment_point_count > 8)
      raise(Errc::ConfigInvalid, "dataset.alignment_points must lie in 4..8");
  }
};

namespace detail {

template <typename T>
T get_number(const toml::Value& v, const std::string& key) {
  if (const auto* i = std::get_if<int64_t>(&v)) return static_cast<T>(*i);
  if (const auto* d = std::get_if<double>(&v)) return static_cast<T>(*d);
  raise(Errc::ConfigInvalid, "key '" + key + "' must be a number");
}

inline std::string get_string(const toml::Value& v, const std::string& key) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  raise(Errc::ConfigInvalid, "key '" + key + "' must be a string");
}

}  // namespace detail

/// Applies a parsed TOML table onto a base config (usually the per-command
/// defaults). Unknown keys are rejected.
inline RunConfig config_from_table(const toml::Table& table, RunConfig cfg = {}) {
  for (const auto& [key, value] : table) {
    using detail::get_number;
    using detail::get_string;
    if (key == "seed") cfg.seed = get_number<uint64_t>(value, key);
    else if (key == "alpha") cfg.alpha = get_number<double>(value, key);
    else if (key == "threshold") cfg.threshold = get_number<double>(value, key);
    else if (key == "method") cfg.method = get_string(value, key);
    else if (key == "segmenter") cfg.segmenter = get_string(value, key);
    else if (key == "adapter_cmd") cfg.adapter_cmd = get_string(value, key);
    else if (key == "embedder_cmd") cfg.embedder_cmd = get_string(value, key);
    else if (key == "endpoint") cfg.endpoint = get_string(value, key);
    else if (key == "jobs") cfg.jobs = get_number<int>(value, key);
    else if (key == "out_dir") cfg.out_dir = get_string(value, key);
    else if (key == "codec") cfg.codec = parse_codec(get_string(value, key));
    else if (key == "crop.x") cfg.crop.x = get_number<uint32_t>(value, key);
    else if (key == "crop.y") cfg.crop.y = get_number<uint32_t>(value, key);
    else if (key == "crop.w") cfg.crop.w = get_number<uint32_t>(value, key);
    else if (key == "crop.h") cfg.crop.h = get_number<uint32_t>(value, key);
    else if (key == "perturb.dilate_erode_radius")
      cfg.perturb.dilate_erode_radius = get_number<int>(value, key);
    else if (key == "perturb.jitter_sigma")
      cfg.perturb.jitter_sigma = get_number<double>(value, key);
    else if (key == "perturb.miss_rate") cfg.perturb.miss_rate = get_number<double>(value, key);
    else if (key == "perturb.spurious_rate")
      cfg.perturb.spurious_rate = get_number<double>(value, key);
    else if (key == "perturb.seed") cfg.perturb.seed = get_number<uint64_t>(value, key);
    else if (key == "skin.hue_lo") cfg.skin.hue_lo = get_number<double>(value, key);
    else if (key == "skin.hue_hi") cfg.skin.hue_hi = get_number<double>(value, key);
    else if (key == "skin.sat_lo") cfg.skin.sat_lo = get_number<double>(value, key);
    else if (key == "skin.sat_hi") cfg.skin.sat_hi = get_number<double>(value, key);
    else if (key == "skin.val_lo") cfg.skin.val_lo = get_number<double>(value, key);
    else if (key == "skin.val_hi") cfg.skin.val_hi = get_number<double>(value, key);
    else if (key == "motion.base_threshold")
      cfg.motion.base_threshold = get_number<double>(value, key);
    else if (key == "motion.capture_period_ms")
      cfg.motion.capture_period_ms = get_number<uint32_t>(value, key);
    else if (key == "motion.reference_distance")
      cfg.motion.reference_distance = get_number<double>(value, key);
    else if (key == "motion.min_threshold")
      cfg.motion.min_threshold = get_number<double>(value, key);
    else if (key == "motion.max_threshold")
      cfg.motion.max_threshold = get_number<double>(value, key);
    else if (key == "dataset.name") cfg.dataset.name = get_string(value, key);
    else if (key == "dataset.val_count")
      cfg.dataset.val_count = get_number<size_t>(value, key);
    else if (key == "dataset.test_count")
      cfg.dataset.test_count = get_number<size_t>(value, key);
    else if (key == "dataset.shift_lo") cfg.dataset.shift.lo = get_number<double>(value, key);
    else if (key == "dataset.shift_hi") cfg.dataset.shift.hi = get_number<double>(value, key);
    else if (key == "dataset.tint_r") cfg.dataset.filter.tint[0] = get_number<uint8_t>(value, key);
    else if (key == "dataset.tint_g") cfg.dataset.filter.tint[1] = get_number<uint8_t>(value, key);
    else if (key == "dataset.tint_b") cfg.dataset.filter.tint[2] = get_number<uint8_t>(value, key);
    else if (key == "dataset.tint_alpha")
      cfg.dataset.filter.tint_alpha = get_number<double>(value, key);
    else if (key == "dataset.brightness_delta")
      cfg.dataset.filter.brightness_delta = get_number<int>(value, key);
    else if (key == "dataset.saturation_scale")
      cfg.dataset.filter.saturation_scale = get_number<double>(value, key);
    else if (key == "dataset.alignment_points")
      cfg.dataset.alignment_point_count = get_number<size_t>(value, key);
    else
      raise(Errc::ConfigInvalid, "unknown config key '" + key + "'");
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = {}) {
  return config_from_table(toml::parse_file(path), std::move(base));
}

}  // namespace mrv
