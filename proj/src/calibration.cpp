// Copyright 2026 The openset Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "openset/calibration.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "openset/error.hpp"

namespace openset {

using nlohmann::json;

std::vector<double> default_threshold_grid() {
  std::vector<double> grid(21);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(5 * i) / 100.0;
  return grid;
}

CombinedMetric combined_metric(std::span<const double> map_vals, std::span<const double> ru_vals) {
  if (map_vals.empty() || map_vals.size() != ru_vals.size()) {
    fail(ErrorKind::LengthMismatch, "metric vectors must be non-empty and of equal length");
  }
  CombinedMetric out;
  out.values.assign(map_vals.size(), 0.0);
  const double map_max = *std::max_element(map_vals.begin(), map_vals.end());
  const double ru_max = *std::max_element(ru_vals.begin(), ru_vals.end());
  out.map_all_zero = !(map_max > 0.0);
  out.recall_all_zero = !(ru_max > 0.0);
  for (std::size_t i = 0; i < map_vals.size(); ++i) {
    if (!out.map_all_zero) out.values[i] += map_vals[i] / map_max;
    if (!out.recall_all_zero) out.values[i] += ru_vals[i] / ru_max;
  }
  return out;
}

std::size_t argmax_first(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::EmptyVector, "argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

CalibrationCurve calibrate(const ScoredDump& pretest, const AnnotatedDataset& annotations,
                           const CalibrationOptions& opts) {
  if (pretest.dump == nullptr || pretest.dump->records.empty()) {
    fail(ErrorKind::InvalidArgument, "pretest data is empty");
  }
  if (opts.grid.empty() || !std::is_sorted(opts.grid.begin(), opts.grid.end()) ||
      std::adjacent_find(opts.grid.begin(), opts.grid.end()) != opts.grid.end()) {
    fail(ErrorKind::InvalidArgument, "threshold grid must be strictly increasing");
  }
  if (annotations.count_known() == 0) {
    fail(ErrorKind::NoKnownGroundTruth, "pretest annotations have no known ground truth");
  }
  const bool have_unknown = annotations.count_unknown() > 0;

  CalibrationCurve curve;
  curve.thresholds = opts.grid;
  curve.map_known.resize(opts.grid.size());
  curve.recall_unknown.resize(opts.grid.size());
  EvalOptions eval = opts.eval;
  eval.exec = Exec::Serial;
  parallel_for(opts.grid.size(), opts.eval.exec, [&](std::size_t i) {
    InferenceConfig cfg;
    cfg.epsilon_star = opts.grid[i];
    cfg.top_k = opts.top_k;
    const Predictions preds = infer(pretest, cfg, Exec::Serial);
    curve.map_known[i] = map_known(preds, annotations, eval);
    curve.recall_unknown[i] = have_unknown ? unknown_recall_and_ap(preds, annotations, eval).recall : 0.0;
  });

  const CombinedMetric s = combined_metric(curve.map_known, curve.recall_unknown);
  curve.combined = s.values;
  if (s.map_all_zero) curve.warnings.push_back("AllZero: known mAP is zero at every threshold");
  if (s.recall_all_zero) curve.warnings.push_back("AllZero: unknown recall is zero at every threshold");
  curve.chosen = argmax_first(curve.combined);
  curve.epsilon_star = curve.thresholds[curve.chosen];
  return curve;
}

CalibrationCurve calibrate(const FeatureDump& pretest, const AnnotatedDataset& annotations,
                           const ObjectnessModel& model, const CalibrationOptions& opts) {
  return calibrate(score_dump(pretest, model, opts.eval.exec), annotations, opts);
}

std::string serialize_curve(const CalibrationCurve& c) {
  return json{{"format", "openset-calibration-curve"},
              {"version", 1},
              {"thresholds", c.thresholds},
              {"map_known", c.map_known},
              {"recall_unknown", c.recall_unknown},
              {"combined", c.combined},
              {"chosen_index", c.chosen},
              {"epsilon_star", c.epsilon_star},
              {"warnings", c.warnings}}
             .dump(2) +
         "\n";
}

CalibrationCurve parse_curve(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  try {
    if (j.at("format") != "openset-calibration-curve" || j.at("version") != 1) {
      throw SchemaError("not a calibration curve");
    }
    CalibrationCurve c;
    c.thresholds = j.at("thresholds").get<std::vector<double>>();
    c.map_known = j.at("map_known").get<std::vector<double>>();
    c.recall_unknown = j.at("recall_unknown").get<std::vector<double>>();
    c.combined = j.at("combined").get<std::vector<double>>();
    c.chosen = j.at("chosen_index").get<std::size_t>();
    c.epsilon_star = j.at("epsilon_star").get<double>();
    c.warnings = j.at("warnings").get<std::vector<std::string>>();
    const std::size_t n = c.thresholds.size();
    if (n == 0 || c.map_known.size() != n || c.recall_unknown.size() != n || c.combined.size() != n ||
        c.chosen >= n || c.thresholds[c.chosen] != c.epsilon_star) {
      throw SchemaError("inconsistent calibration curve");
    }
    return c;
  } catch (const SchemaError& e) {
    throw SchemaError(source + ": " + e.what());
  } catch (const std::exception& e) {
    throw SchemaError(source + ": " + e.what());
  }
}

void save_curve(const CalibrationCurve& curve, const std::filesystem::path& path) {
  write_text_file(path, serialize_curve(curve));
}

CalibrationCurve load_curve(const std::filesystem::path& path) {
  return parse_curve(read_text_file(path), path.string());
}

std::string curve_plot_data(const CalibrationCurve& c) {
  std::ostringstream os;
  os << "threshold\tmap_known\trecall_unknown\tcombined\n";
  char buf[128];
  for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\t%.17g\t%.17g\t%.17g\n", c.thresholds[i], c.map_known[i],
                  c.recall_unknown[i], c.combined[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace openset
