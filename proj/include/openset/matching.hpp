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

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "openset/datamodel.hpp"

namespace openset {

// Dense IoU table, rows = drivers, cols = candidates.
class IouMatrix {
 public:
  IouMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), v_(rows * cols) {}

  static IouMatrix between(std::span<const PixelBox> drivers, std::span<const PixelBox> candidates);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> v_;
};

// Greedy one-to-one matching used by labeling, role assignment and every
// metric. Drivers are visited in row order; each takes the still-unmatched
// candidate with the highest IoU >= threshold, equal IoU going to the lowest
// column. Returns the matched column per row.
std::vector<std::optional<std::size_t>> greedy_match(const IouMatrix& iou, double threshold);

// Indices sorted by descending score; ties keep ascending index order.
std::vector<std::size_t> rank_descending(std::span<const double> scores);

}  // namespace openset
