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

#include <span>
#include <vector>

#include "openset/datamodel.hpp"
#include "openset/featurizer.hpp"
#include "openset/ingest.hpp"
#include "openset/objectness_model.hpp"
#include "openset/parallel.hpp"

namespace openset {

struct InferenceConfig {
  double epsilon_star = 0.25;
  int top_k = 100;
  std::size_t known_class_count = 0;  // 0: take the length of each cls vector
};

// Ranks queries by p_obj (ties: p_conf, then index). The top_k become
// foreground: Known(argmax class) when p_conf >= epsilon_star, otherwise
// Unknown scored by p_obj. Everything else is Background. One detection per
// query, in query order.
std::vector<Detection> decide(std::span<const QueryOutput> queries,
                              std::span<const ObjectnessFeatures> features,
                              std::span<const double> p_obj, const InferenceConfig& cfg);

// Features and objectness for every query of a dump, computed once and then
// reused across thresholds.
struct ScoredDump {
  const FeatureDump* dump = nullptr;
  std::vector<std::vector<ObjectnessFeatures>> features;
  std::vector<std::vector<double>> p_obj;
};

ScoredDump score_dump(const FeatureDump& dump, const ObjectnessModel& model,
                      Exec exec = Exec::Parallel);

// Baseline without an estimator: objectness is the raw confidence.
ScoredDump score_confidence_only(const FeatureDump& dump, Exec exec = Exec::Parallel);

Predictions infer(const ScoredDump& scored, const InferenceConfig& cfg, Exec exec = Exec::Parallel);

}  // namespace openset
