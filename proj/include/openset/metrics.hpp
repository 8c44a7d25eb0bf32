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

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "openset/datamodel.hpp"
#include "openset/ingest.hpp"
#include "openset/parallel.hpp"

namespace openset {

// 0.50, 0.55, ..., 0.95
std::array<double, 10> coco_iou_thresholds();

enum class ApInterpolation { Coco101, AllPoint };

// One scored detection of a single class, tied to an image by index.
struct RankedDetection {
  std::size_t image = 0;
  Box box;
  double confidence = 0;
};

// Ground-truth boxes of one class, indexed like `images`.
struct ClassGroundTruth {
  std::span<const ImageMeta> images;
  std::vector<std::vector<Box>> boxes;

  std::size_t count() const;
};

// Detections sorted by confidence (ties: image index, then input order) and
// greedily matched to the unmatched ground truth with the highest IoU.
// Returns nullopt when there is no ground truth.
std::optional<double> average_precision(std::span<const RankedDetection> dets,
                                        const ClassGroundTruth& gts, double iou_threshold,
                                        ApInterpolation interp = ApInterpolation::Coco101);

// Area under the interpolated precision-recall curve given TP flags in rank
// order.
double ap_from_ranked_tp(std::span<const char> tp, std::size_t n_gt,
                         ApInterpolation interp = ApInterpolation::Coco101);

struct EvalOptions {
  ApInterpolation interpolation = ApInterpolation::Coco101;
  double wi_recall_level = 0.8;
  Exec exec = Exec::Parallel;
};

// Known-class mAP over the IoU sweep. Unknown ground truths are ignored.
double map_known(const Predictions& preds, const AnnotatedDataset& dataset,
                 const EvalOptions& opts = {});

struct UnknownScores {
  double recall = 0;
  double ap = 0;
  std::array<double, 10> recall_at{};
  std::array<double, 10> ap_at{};
};

UnknownScores unknown_recall_and_ap(const Predictions& preds, const AnnotatedDataset& dataset,
                                    const EvalOptions& opts = {});

struct WildernessImpact {
  double value = 0;
  std::size_t tp_known = 0;
  std::size_t fp_known = 0;
  std::size_t fp_unknown = 0;
  std::size_t prefix = 0;
  bool recall_reached = true;
};

// Pooled known-labeled detections, cut at the shortest confidence prefix that
// reaches the known-recall level at IoU 0.5.
WildernessImpact wilderness_impact(const Predictions& preds, const AnnotatedDataset& dataset,
                                   double recall_level = 0.8, Exec exec = Exec::Parallel);

inline double wi_ratio(std::size_t tp_known, std::size_t fp_known, std::size_t fp_unknown) {
  const std::size_t denom = tp_known + fp_known;
  return denom == 0 ? 0.0 : static_cast<double>(fp_unknown) / static_cast<double>(denom);
}

// Unknown ground truths claimed by known-labeled detections.
std::size_t aose(const Predictions& preds, const AnnotatedDataset& dataset,
                 Exec exec = Exec::Parallel);

struct IouBreakdown {
  double iou = 0;
  double map_known = 0;
  double ap_unknown = 0;
  double recall_unknown = 0;

  bool operator==(const IouBreakdown&) const = default;
};

struct EvalReport {
  double map_known = 0;
  double ap_unknown = 0;
  double recall_unknown = 0;
  double wilderness_impact = 0;
  std::size_t aose = 0;
  std::map<int, double> per_class_ap;
  std::vector<IouBreakdown> per_iou;
  std::size_t wi_tp_known = 0;
  std::size_t wi_fp_known = 0;
  std::size_t wi_fp_unknown = 0;
  bool wi_recall_reached = true;
  std::size_t images = 0;
  std::size_t known_gt = 0;
  std::size_t unknown_gt = 0;
  std::vector<std::string> warnings;

  double wilderness_impact_x100() const { return 100.0 * wilderness_impact; }
  bool operator==(const EvalReport&) const = default;
};

// Full report. Missing known or unknown ground truth zeroes the affected
// metrics and adds a warning instead of failing.
EvalReport evaluate(const Predictions& preds, const AnnotatedDataset& dataset,
                    const EvalOptions& opts = {});

std::string serialize_report(const EvalReport& report);
EvalReport parse_report(std::string_view text, const std::string& source = "<string>");
void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

// Human-readable table, one row per labeled report.
std::string format_report_table(std::span<const std::pair<std::string, EvalReport>> rows);

}  // namespace openset
