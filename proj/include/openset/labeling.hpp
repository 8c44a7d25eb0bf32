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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "openset/datamodel.hpp"
#include "openset/featurizer.hpp"
#include "openset/ingest.hpp"
#include "openset/parallel.hpp"

namespace openset {

inline constexpr double kDefaultLabelIou = 0.5;

enum class Role { Known, Unknown, Background };

struct LabeledExample {
  ObjectnessFeatures features;
  int label = 0;  // 1 = object, 0 = background
  std::string image_id;
  std::optional<std::size_t> matched_gt;
  bool operator==(const LabeledExample&) const = default;
};

// Matches ground truths (in their given order) to queries ranked by
// descending p_conf. Returns the matched ground-truth index per query.
std::vector<std::optional<std::size_t>> match_queries(std::span<const QueryOutput> queries,
                                                      std::span<const GroundTruth> gts,
                                                      const ImageMeta& meta, double iou_threshold);

std::vector<LabeledExample> assign_labels(std::span<const QueryOutput> queries,
                                          std::span<const GroundTruth> gts, const ImageMeta& meta,
                                          double iou_threshold = kDefaultLabelIou);

// Labeling's matcher with the known/unknown distinction kept.
std::vector<Role> assign_roles(std::span<const QueryOutput> queries,
                               std::span<const GroundTruth> gts, const ImageMeta& meta,
                               double iou_threshold = kDefaultLabelIou);

struct TrainingSet {
  FeatureMatrix features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

// Rows in (record, query) order. Every dump record must exist in the dataset
// with the same image size.
TrainingSet build_training_set(const FeatureDump& dump, const AnnotatedDataset& dataset,
                               double iou_threshold = kDefaultLabelIou,
                               const FeatureMask& mask = {}, Exec exec = Exec::Parallel);

// Looks up the annotated image for a dump record, raising MissingImage or
// SchemaError on mismatch.
const ImageMeta& matching_image(const AnnotatedDataset& dataset, const ImageMeta& meta);

}  // namespace openset
