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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "openset/calibration.hpp"
#include "openset/featurizer.hpp"
#include "openset/ingest.hpp"
#include "openset/metrics.hpp"
#include "openset/mlp.hpp"
#include "openset/objectness_model.hpp"
#include "openset/random_forest.hpp"
#include "openset/synth.hpp"

namespace openset {

// Fixed stream ids for fanning one seed out to the pipeline's consumers.
enum class SeedStream : std::uint64_t { SynthTrain = 0, SynthPretest = 1, SynthTest = 2, Model = 3 };

std::uint64_t component_seed(std::uint64_t seed, SeedStream stream);

struct TrainOptions {
  EstimatorKind kind = EstimatorKind::RandomForest;
  ForestConfig forest;
  MlpConfig mlp;
  FeatureMask mask;
  double iou_threshold = kDefaultLabelIou;
  std::uint64_t seed = 0;
  Exec exec = Exec::Parallel;
};

ObjectnessModel train_objectness(const FeatureDump& dump, const AnnotatedDataset& dataset,
                                 const TrainOptions& opts);

struct Split {
  FeatureDump dump;
  AnnotatedDataset dataset;
};

struct SplitSizes {
  int train = 50;
  int pretest = 20;
  int test = 50;
};

struct SynthSplits {
  SynthData train;
  SynthData pretest;
  SynthData test;
};

// Three independent splits from one seed; image ids carry the split name.
SynthSplits generate_splits(const SynthConfig& base, const SplitSizes& sizes, std::uint64_t seed);

// Writes dump.jsonl, annotations.json and roles.jsonl under dir.
void write_synth_split(const SynthData& data, const std::filesystem::path& dir);

struct AblationRow {
  std::string label;
  FeatureMask mask;
  bool confidence_only = false;
  EvalReport report;
};

struct AblationOptions {
  TrainOptions train;  // mask is replaced per row
  std::vector<FeatureMask> masks;
  bool confidence_baseline = true;
  CalibrationOptions calibration;
  // Already trained full-feature model; trained here when null.
  const ObjectnessModel* full_model = nullptr;
};

struct AblationResult {
  // Calibrated once with the full feature set and shared by every row.
  double epsilon_star = 0;
  CalibrationCurve curve;
  std::vector<AblationRow> rows;
};

// Every mask: the full set plus one row per single dropped feature.
std::vector<FeatureMask> single_drop_masks();

AblationResult run_ablation(const Split& train, const Split& pretest, const Split& test,
                            const AblationOptions& opts);

std::string serialize_ablation(const AblationResult& result);
std::string format_ablation_table(const AblationResult& result);

}  // namespace openset
