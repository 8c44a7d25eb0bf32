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

#include "openset/pipeline.hpp"

#include <utility>

#include "json.hpp"
#include "openset/error.hpp"
#include "openset/inference.hpp"
#include "openset/labeling.hpp"
#include "openset/rng.hpp"

namespace openset {

using nlohmann::json;

std::uint64_t component_seed(std::uint64_t seed, SeedStream stream) {
  return derive_seed(seed, static_cast<std::uint64_t>(stream));
}

ObjectnessModel train_objectness(const FeatureDump& dump, const AnnotatedDataset& dataset,
                                 const TrainOptions& opts) {
  const TrainingSet ts = build_training_set(dump, dataset, opts.iou_threshold, opts.mask, opts.exec);
  if (ts.size() == 0) fail(ErrorKind::EmptySample, "training dump has no queries");
  if (opts.kind == EstimatorKind::RandomForest) {
    return train_random_forest(ts.features, ts.labels, opts.forest, opts.seed, opts.exec);
  }
  return train_mlp(ts.features, ts.labels, opts.mlp, opts.seed);
}

SynthSplits generate_splits(const SynthConfig& base, const SplitSizes& sizes, std::uint64_t seed) {
  auto one = [&](const char* name, int n, SeedStream stream) {
    SynthConfig cfg = base;
    cfg.n_images = n;
    cfg.id_prefix = name;
    cfg.seed = component_seed(seed, stream);
    return generate(cfg);
  };
  return {one("train", sizes.train, SeedStream::SynthTrain),
          one("pretest", sizes.pretest, SeedStream::SynthPretest),
          one("test", sizes.test, SeedStream::SynthTest)};
}

void write_synth_split(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_feature_dump(data.dump, dir / "dump.jsonl");
  write_annotations(data.dataset, dir / "annotations.json");
  write_planted_roles(data, dir / "roles.jsonl");
}

std::vector<FeatureMask> single_drop_masks() {
  std::vector<FeatureMask> masks{FeatureMask{}};
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    masks.push_back(FeatureMask::dropping({static_cast<Feature>(f)}));
  }
  return masks;
}

AblationResult run_ablation(const Split& train, const Split& pretest, const Split& test,
                            const AblationOptions& opts) {
  AblationResult result;
  const std::vector<FeatureMask> masks = opts.masks.empty() ? single_drop_masks() : opts.masks;

  TrainOptions full_opts = opts.train;
  full_opts.mask = FeatureMask{};
  const ObjectnessModel full = opts.full_model
                                   ? *opts.full_model
                                   : train_objectness(train.dump, train.dataset, full_opts);
  result.curve = calibrate(pretest.dump, pretest.dataset, full, opts.calibration);
  result.epsilon_star = result.curve.epsilon_star;

  InferenceConfig icfg;
  icfg.epsilon_star = result.epsilon_star;
  icfg.top_k = opts.calibration.top_k;
  const Exec exec = opts.calibration.eval.exec;

  auto evaluate_scored = [&](const ScoredDump& scored) {
    return evaluate(infer(scored, icfg, exec), test.dataset, opts.calibration.eval);
  };

  for (const FeatureMask& mask : masks) {
    AblationRow row;
    row.label = mask.label();
    row.mask = mask;
    if (mask.none()) {
      row.report = evaluate_scored(score_dump(test.dump, full, exec));
    } else {
      TrainOptions t = opts.train;
      t.mask = mask;
      const ObjectnessModel m = train_objectness(train.dump, train.dataset, t);
      row.report = evaluate_scored(score_dump(test.dump, m, exec));
    }
    result.rows.push_back(std::move(row));
  }
  if (opts.confidence_baseline) {
    AblationRow row;
    row.label = "confidence only";
    row.confidence_only = true;
    row.report = evaluate_scored(score_confidence_only(test.dump, exec));
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string serialize_ablation(const AblationResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) {
    rows.push_back({{"label", row.label},
                    {"dropped_features", row.mask.dropped_names()},
                    {"confidence_only", row.confidence_only},
                    {"report", json::parse(serialize_report(row.report))}});
  }
  return json{{"format", "openset-ablation"},
              {"version", 1},
              {"epsilon_star", result.epsilon_star},
              {"calibration", json::parse(serialize_curve(result.curve))},
              {"rows", rows}}
             .dump(1) +
         "\n";
}

std::string format_ablation_table(const AblationResult& result) {
  std::vector<std::pair<std::string, EvalReport>> rows;
  for (const auto& row : result.rows) rows.emplace_back(row.label, row.report);
  char head[64];
  std::snprintf(head, sizeof head, "epsilon* = %.2f\n", result.epsilon_star);
  return head + format_report_table(rows);
}

}  // namespace openset
