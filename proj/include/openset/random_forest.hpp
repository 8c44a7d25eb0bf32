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

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 10;
  int min_samples_split = 10;
  int min_samples_leaf = 10;
  // Weight of positive samples in impurity and leaf fractions.
  double positive_weight = 1.0;

  bool operator==(const ForestConfig&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;  // rows with x[feature] <= threshold go left
  int left = -1;
  int right = -1;
  double value = 0;  // leaf: weighted positive fraction

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at index 0

  double predict(const FeatureRow& x) const;
  int depth() const;
  bool operator==(const DecisionTree&) const = default;
};

struct RandomForestModel {
  ForestConfig config;
  std::uint64_t seed = 0;
  FeatureMask mask;
  std::vector<DecisionTree> trees;
  // Set when training saw a single class; predictions are then the prior.
  bool degenerate = false;
  double prior = 0;

  double predict(const FeatureRow& x) const;
  std::vector<double> predict(std::span<const FeatureRow> rows, Exec exec = Exec::Parallel) const;
  bool operator==(const RandomForestModel&) const = default;
};

// Bootstrap-resampled Gini trees with exact midpoint split search. Tree t
// draws from a stream derived from (seed, t), so the result does not depend
// on the worker count.
RandomForestModel train_random_forest(const FeatureMatrix& X, std::span<const int> y,
                                      const ForestConfig& config, std::uint64_t seed,
                                      Exec exec = Exec::Parallel);

}  // namespace openset
