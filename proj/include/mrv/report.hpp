// Copyright (c) 2026 mrverify authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrv/error.hpp"
#include "mrv/metrics.hpp"
#include "mrv/pipeline.hpp"

namespace mrv {

struct EvaluationReport {
  Method method = Method::Iou;
  double threshold = 0.5;  // headline rates are computed at this threshold
  ConfusionCounts counts;
  Rates rates_at_threshold;
  double auc = 0.0;
  double best_thr = 0.0;
  double best_acc = 0.0;
  RocCurve curve;
  std::vector<SampleResult> records;
};

/// rates() raises on a zero denominator; reports degrade the affected rate
/// to NaN instead so a degenerate threshold still yields a usable report.
inline Rates rates_lenient(const ConfusionCounts& c) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  Rates r;
  r.ppv = (c.tp + c.fp) ? double(c.tp) / double(c.tp + c.fp) : nan;
  r.tpr = (c.tp + c.fn) ? double(c.tp) / double(c.tp + c.fn) : nan;
  r.fpr = (c.fp + c.tn) ? double(c.fp) / double(c.fp + c.tn) : nan;
  r.acc = c.total() ? double(c.tp + c.tn) / double(c.total()) : nan;
  return r;
}

inline EvaluationReport make_report(Method method, std::vector<SampleResult> records,
                                    double threshold) {
  if (records.empty()) raise(Errc::EmptyInput, "no records to report on");
  std::vector<double> scores;
  std::vector<bool> truths;
  scores.reserve(records.size());
  for (const auto& r : records) {
    scores.push_back(r.score);
    truths.push_back(r.ground_truth);
  }
  EvaluationReport rep;
  rep.method = method;
  rep.threshold = threshold;
  rep.records = std::move(records);
  rep.counts = confusion(scores, truths, threshold);
  rep.rates_at_threshold = rates_lenient(rep.counts);
  rep.curve = sweep(scores, truths);
  rep.auc = auc(rep.curve);
  std::tie(rep.best_thr, rep.best_acc) = best_threshold(rep.curve);
  return rep;
}

namespace detail {

inline std::string csv_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace detail

inline void write_report_json(const EvaluationReport& rep, const std::filesystem::path& path) {
  // NaN rates (degenerate threshold) serialize as null
  nlohmann::json j;
  j["method"] = method_name(rep.method);
  j["threshold"] = rep.threshold;
  j["counts"] = {{"tp", rep.counts.tp}, {"fn", rep.counts.fn}, {"fp", rep.counts.fp},
                 {"tn", rep.counts.tn}};
  j["rates"] = {{"ppv", rep.rates_at_threshold.ppv},
                {"tpr", rep.rates_at_threshold.tpr},
                {"fpr", rep.rates_at_threshold.fpr},
                {"acc", rep.rates_at_threshold.acc}};
  j["auc"] = rep.auc;
  j["best_threshold"] = rep.best_thr;
  j["best_acc"] = rep.best_acc;
  j["samples"] = rep.records.size();
  auto text = j.dump(2);
  write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
}

inline void write_records_csv(const std::vector<SampleResult>& records,
                              const std::filesystem::path& path) {
  std::ostringstream os;
  os << "id,step_index,step_class,ground_truth,score,pass,iou,chosen_index,candidates,"
        "ref_bytes,tgt_bytes\n";
  for (const auto& r : records) {
    os << r.id << ',' << r.step_index << ',' << r.step_class << ',' << (r.ground_truth ? 1 : 0)
       << ',' << detail::csv_double(r.score) << ',' << (r.decision.pass ? 1 : 0) << ','
       << detail::csv_double(r.decision.iou) << ','
       << (r.decision.chosen_index ? std::to_string(*r.decision.chosen_index) : "") << ','
       << r.decision.candidate_count << ',' << r.ref_bytes << ',' << r.tgt_bytes << "\n";
  }
  auto text = os.str();
  write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
}

inline void write_curve_csv(const RocCurve& curve, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "threshold,fpr,tpr,acc\n";
  for (const auto& p : curve.points) {
    os << detail::csv_double(p.threshold) << ',' << detail::csv_double(p.fpr) << ','
       << detail::csv_double(p.tpr) << ',' << detail::csv_double(p.acc) << "\n";
  }
  auto text = os.str();
  write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
}

/// Reloads a records CSV (the `report` command's input) into score/truth
/// sequences so rates can be recomputed and cross-checked.
inline std::pair<std::vector<double>, std::vector<bool>> read_records_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::MissingFile, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> scores;
  std::vector<bool> truths;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 5) raise(Errc::ManifestCorrupt, "bad records row: " + line);
    truths.push_back(fields[3] == "1");
    scores.push_back(fields[4] == "inf"
                         ? std::numeric_limits<double>::infinity()
                         : (fields[4] == "-inf" ? -std::numeric_limits<double>::infinity()
                                                : std::stod(fields[4])));
  }
  return {scores, truths};
}

}  // namespace mrv
