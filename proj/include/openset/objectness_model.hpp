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
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "openset/featurizer.hpp"
#include "openset/mlp.hpp"
#include "openset/random_forest.hpp"

namespace openset {

using ObjectnessModel = std::variant<RandomForestModel, MlpModel>;

enum class EstimatorKind { RandomForest, Mlp };

EstimatorKind parse_estimator_kind(std::string_view name);
std::string_view estimator_name(EstimatorKind kind);
EstimatorKind kind_of(const ObjectnessModel& model);
const FeatureMask& model_mask(const ObjectnessModel& model);

// p_obj per row. The matrix must carry the model's feature mask.
std::vector<double> predict_objectness(const ObjectnessModel& model, const FeatureMatrix& X,
                                       Exec exec = Exec::Parallel);

// Canonical text form: identical models serialize to identical bytes.
std::string serialize_model(const ObjectnessModel& model);
ObjectnessModel parse_model(std::string_view text, const std::string& source = "<string>");

void save_model(const ObjectnessModel& model, const std::filesystem::path& path);
ObjectnessModel load_model(const std::filesystem::path& path);

}  // namespace openset
