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

#include "openset/inference.hpp"

#include <algorithm>
#include <numeric>

#include "openset/error.hpp"

namespace openset {

std::vector<Detection> decide(std::span<const QueryOutput> queries,
                              std::span<const ObjectnessFeatures> features,
                              std::span<const double> p_obj, const InferenceConfig& cfg) {
  if (queries.size() != features.size() || queries.size() != p_obj.size()) {
    fail(ErrorKind::LengthMismatch, "queries, features and objectness lists differ in length");
  }
  if (cfg.top_k < 1) fail(ErrorKind::InvalidArgument, "top_k must be at least 1");

  std::vector<std::size_t> order(queries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (p_obj[a] != p_obj[b]) return p_obj[a] > p_obj[b];
    return features[a].p_conf > features[b].p_conf;
  });

  std::vector<Detection> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out[i].box = queries[i].box;
    out[i].objectness = p_obj[i];
    out[i].decision = Decision::Background;
    out[i].confidence = p_obj[i];
  }
  const std::size_t k = std::min(order.size(), static_cast<std::size_t>(cfg.top_k));
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = order[r];
    Detection& d = out[i];
    const double conf = features[i].p_conf;
    if (conf >= cfg.epsilon_star) {
      std::span<const double> cls = queries[i].cls;
      if (cfg.known_class_count > 0) cls = cls.first(std::min(cls.size(), cfg.known_class_count));
      d.decision = Decision::Known;
      d.class_id = static_cast<int>(argmax_class(cls)) + 1;
      d.confidence = conf;
    } else {
      d.decision = Decision::Unknown;
      d.confidence = p_obj[i];
    }
  }
  return out;
}

ScoredDump score_dump(const FeatureDump& dump, const ObjectnessModel& model, Exec exec) {
  ScoredDump s;
  s.dump = &dump;
  s.features = featurize_dump(dump, exec);
  const FeatureMask& mask = model_mask(model);
  s.p_obj.resize(dump.records.size());
  // Predict per image; the models' own row loops stay serial inside.
  parallel_for(dump.records.size(), exec, [&](std::size_t i) {
    s.p_obj[i] = predict_objectness(model, to_matrix(s.features[i], mask), Exec::Serial);
  });
  return s;
}

ScoredDump score_confidence_only(const FeatureDump& dump, Exec exec) {
  ScoredDump s;
  s.dump = &dump;
  s.features = featurize_dump(dump, exec);
  s.p_obj.resize(dump.records.size());
  for (std::size_t i = 0; i < s.features.size(); ++i) {
    for (const auto& f : s.features[i]) s.p_obj[i].push_back(f.p_conf);
  }
  return s;
}

Predictions infer(const ScoredDump& scored, const InferenceConfig& cfg, Exec exec) {
  const auto& records = scored.dump->records;
  std::vector<std::vector<Detection>> per_image(records.size());
  parallel_for(records.size(), exec, [&](std::size_t i) {
    per_image[i] = decide(records[i].queries, scored.features[i], scored.p_obj[i], cfg);
  });
  Predictions preds;
  for (std::size_t i = 0; i < records.size(); ++i) {
    preds.emplace(records[i].meta.image_id, std::move(per_image[i]));
  }
  return preds;
}

}  // namespace openset
