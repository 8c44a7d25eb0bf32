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

// Serial reference path versus the parallel path for the data-parallel
// kernels. Usage: openset_bench [workers] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "openset/analysis.hpp"
#include "openset/calibration.hpp"
#include "openset/featurizer.hpp"
#include "openset/inference.hpp"
#include "openset/labeling.hpp"
#include "openset/metrics.hpp"
#include "openset/nan.hpp"
#include "openset/parallel.hpp"
#include "openset/random_forest.hpp"
#include "openset/rng.hpp"
#include "openset/synth.hpp"

using namespace openset;

namespace {

double best_ms(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void row(const char* name, int repeats, const std::function<void(Exec)>& fn) {
  const double s = best_ms(repeats, [&] { fn(Exec::Serial); });
  const double p = best_ms(repeats, [&] { fn(Exec::Parallel); });
  std::printf("%-22s %10.2f %10.2f %8.2fx\n", name, s, p, p > 0 ? s / p : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  const int workers = argc > 1 ? std::atoi(argv[1]) : 0;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;
  set_worker_count(workers);

  SynthConfig cfg;
  cfg.n_images = 40;
  const SynthData data = generate(cfg);

  std::vector<std::vector<double>> vectors;
  for (const auto& rec : data.dump.records) {
    for (const auto& q : rec.queries) vectors.push_back(q.feat);
  }
  const TrainingSet ts = build_training_set(data.dump, data.dataset);
  ForestConfig fc;
  fc.n_trees = 32;
  const RandomForestModel forest = train_random_forest(ts.features, ts.labels, fc, 1);
  const ScoredDump scored = score_dump(data.dump, forest);
  InferenceConfig icfg;
  const Predictions preds = infer(scored, icfg);

  std::vector<double> samples(20000);
  Rng rng(3);
  for (auto& s : samples) s = rng.normal();

  std::printf("workers %d\n%-22s %10s %10s %9s\n", worker_count(), "kernel", "serial ms", "parallel ms",
              "speedup");
  row("nan_scores", repeats, [&](Exec e) { (void)nan_scores(vectors, e); });
  row("featurize_dump", repeats, [&](Exec e) { (void)featurize_dump(data.dump, e); });
  row("forest_train", repeats, [&](Exec e) { (void)train_random_forest(ts.features, ts.labels, fc, 1, e); });
  row("forest_predict", repeats, [&](Exec e) { (void)forest.predict(ts.features.rows, e); });
  row("infer", repeats, [&](Exec e) { (void)infer(scored, icfg, e); });
  row("evaluate", repeats, [&](Exec e) {
    EvalOptions o;
    o.exec = e;
    (void)evaluate(preds, data.dataset, o);
  });
  row("kde", repeats, [&](Exec e) { (void)kde(samples, std::nullopt, e); });
  return 0;
}
