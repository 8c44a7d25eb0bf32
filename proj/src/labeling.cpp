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

#include "openset/labeling.hpp"

#include "openset/error.hpp"
#include "openset/matching.hpp"

namespace openset {

namespace {

void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) fail(ErrorKind::InvalidArgument, "IoU threshold must be in (0, 1]");
}

}  // namespace

std::vector<std::optional<std::size_t>> match_queries(std::span<const QueryOutput> queries,
                                                      std::span<const GroundTruth> gts,
                                                      const ImageMeta& meta,
                                                      double iou_threshold) {
  check_threshold(iou_threshold);
  std::vector<double> conf(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) conf[i] = max_confidence(queries[i].cls);
  const auto order = rank_descending(conf);

  std::vector<PixelBox> gt_px, q_px;
  gt_px.reserve(gts.size());
  q_px.reserve(queries.size());
  for (const auto& g : gts) gt_px.push_back(g.box.to_pixels(meta));
  for (std::size_t idx : order) q_px.push_back(queries[idx].box.to_pixels(meta));

  const auto match = greedy_match(IouMatrix::between(gt_px, q_px), iou_threshold);
  std::vector<std::optional<std::size_t>> gt_of_query(queries.size());
  for (std::size_t g = 0; g < match.size(); ++g) {
    if (match[g]) gt_of_query[order[*match[g]]] = g;
  }
  return gt_of_query;
}

std::vector<LabeledExample> assign_labels(std::span<const QueryOutput> queries,
                                          std::span<const GroundTruth> gts, const ImageMeta& meta,
                                          double iou_threshold) {
  const auto gt_of_query = match_queries(queries, gts, meta, iou_threshold);
  std::vector<LabeledExample> out;
  out.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out.push_back({featurize(queries[i], meta), gt_of_query[i] ? 1 : 0, meta.image_id,
                   gt_of_query[i]});
  }
  return out;
}

std::vector<Role> assign_roles(std::span<const QueryOutput> queries,
                               std::span<const GroundTruth> gts, const ImageMeta& meta,
                               double iou_threshold) {
  const auto gt_of_query = match_queries(queries, gts, meta, iou_threshold);
  std::vector<Role> roles(queries.size(), Role::Background);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (gt_of_query[i]) roles[i] = gts[*gt_of_query[i]].is_known() ? Role::Known : Role::Unknown;
  }
  return roles;
}

const ImageMeta& matching_image(const AnnotatedDataset& dataset, const ImageMeta& meta) {
  const ImageMeta* ann = dataset.find_image(meta.image_id);
  if (!ann) {
    fail(ErrorKind::MissingImage, "image '" + meta.image_id + "' is not in the annotations");
  }
  if (ann->width != meta.width || ann->height != meta.height) {
    throw SchemaError("image '" + meta.image_id + "' size differs between dump and annotations");
  }
  return *ann;
}

TrainingSet build_training_set(const FeatureDump& dump, const AnnotatedDataset& dataset,
                               double iou_threshold, const FeatureMask& mask, Exec exec) {
  check_threshold(iou_threshold);
  std::vector<std::vector<LabeledExample>> per_image(dump.records.size());
  parallel_for(dump.records.size(), exec, [&](std::size_t i) {
    const auto& rec = dump.records[i];
    matching_image(dataset, rec.meta);
    per_image[i] = assign_labels(rec.queries, dataset.gts(rec.meta.image_id), rec.meta,
                                 iou_threshold);
  });

  TrainingSet set;
  set.features.mask = mask;
  for (const auto& examples : per_image) {
    for (const auto& ex : examples) {
      set.features.rows.push_back(mask.apply(ex.features.row()));
      set.labels.push_back(ex.label);
    }
  }
  return set;
}

}  // namespace openset
