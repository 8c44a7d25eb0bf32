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

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "openset/inference.hpp"
#include "openset/ingest.hpp"
#include "openset/metrics.hpp"
#include "openset/objectness_model.hpp"

namespace openset {

// [0, 0.05, ..., 1.0]
std::vector<double> default_threshold_grid();

struct CombinedMetric {
  std::vector<double> values;
  // A term whose metric vector is identically zero contributes 0.
  bool map_all_zero = false;
  bool recall_all_zero = false;
};

// S_i = map_i / max(map) + ru_i / max(ru)
CombinedMetric combined_metric(std::span<const double> map_vals, std::span<const double> ru_vals);

// First index of the maximum.
std::size_t argmax_first(std::span<const double> values);

struct CalibrationCurve {
  std::vector<double> thresholds;
  std::vector<double> map_known;
  std::vector<double> recall_unknown;
  std::vector<double> combined;
  std::size_t chosen = 0;
  double epsilon_star = 0;
  std::vector<std::string> warnings;

  bool operator==(const CalibrationCurve&) const = default;
};

struct CalibrationOptions {
  std::vector<double> grid = default_threshold_grid();
  int top_k = 100;
  EvalOptions eval;
};

// Sweeps the confidence threshold over the grid on pretest data and keeps the
// argmax of the combined metric (ties: smallest threshold).
CalibrationCurve calibrate(const ScoredDump& pretest, const AnnotatedDataset& annotations,
                           const CalibrationOptions& opts = {});
CalibrationCurve calibrate(const FeatureDump& pretest, const AnnotatedDataset& annotations,
                           const ObjectnessModel& model, const CalibrationOptions& opts = {});

std::string serialize_curve(const CalibrationCurve& curve);
CalibrationCurve parse_curve(std::string_view text, const std::string& source = "<string>");
void save_curve(const CalibrationCurve& curve, const std::filesystem::path& path);
CalibrationCurve load_curve(const std::filesystem::path& path);

// Columns: threshold, map_known, recall_unknown, combined.
std::string curve_plot_data(const CalibrationCurve& curve);

}  // namespace openset
