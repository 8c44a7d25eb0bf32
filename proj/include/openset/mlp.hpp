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
#include <span>
#include <vector>

#include "openset/featurizer.hpp"
#include "openset/parallel.hpp"

namespace openset {

struct MlpConfig {
  std::vector<int> hidden = {96, 48, 24};
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 50;
  // Early stopping on a held-out split of the training rows.
  bool early_stop = false;
  double validation_fraction = 0.1;
  int patience = 5;
  double positive_weight = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  bool operator==(const MlpConfig&) const = default;
};

// Fully connected layer, weights stored row-major as out x in.
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

struct MlpGradients {
  std::vector<DenseLayer> layers;
};

// Rectifier hidden layers, logistic output.
struct MlpModel {
  MlpConfig config;
  std::uint64_t seed = 0;
  FeatureMask mask;
  std::vector<DenseLayer> layers;
  // Mean training loss after each completed epoch.
  std::vector<double> loss_history;
  int trained_epochs = 0;

  double logit(const FeatureRow& x) const;
  double predict(const FeatureRow& x) const;
  std::vector<double> predict(std::span<const FeatureRow> rows, Exec exec = Exec::Parallel) const;
  bool operator==(const MlpModel&) const = default;
};

// Weights and biases drawn uniformly from +-1/sqrt(fan_in).
MlpModel init_mlp(const MlpConfig& config, std::uint64_t seed, const FeatureMask& mask = {});

// Mean (weighted) binary cross-entropy over the rows. Fills grad when given.
double mlp_loss(const MlpModel& model, std::span<const FeatureRow> rows, std::span<const int> y,
                MlpGradients* grad = nullptr);

MlpModel train_mlp(const FeatureMatrix& X, std::span<const int> y, const MlpConfig& config,
                   std::uint64_t seed);

}  // namespace openset
