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

#include "openset/matching.hpp"

#include <algorithm>
#include <numeric>

namespace openset {

IouMatrix IouMatrix::between(std::span<const PixelBox> drivers,
                             std::span<const PixelBox> candidates) {
  IouMatrix m(drivers.size(), candidates.size());
  for (std::size_t r = 0; r < drivers.size(); ++r) {
    for (std::size_t c = 0; c < candidates.size(); ++c) m.at(r, c) = iou(drivers[r], candidates[c]);
  }
  return m;
}

std::vector<std::optional<std::size_t>> greedy_match(const IouMatrix& iou, double threshold) {
  std::vector<std::optional<std::size_t>> match(iou.rows());
  std::vector<char> taken(iou.cols(), 0);
  for (std::size_t r = 0; r < iou.rows(); ++r) {
    double best = threshold;
    std::optional<std::size_t> pick;
    for (std::size_t c = 0; c < iou.cols(); ++c) {
      if (taken[c]) continue;
      const double v = iou.at(r, c);
      if (v >= best && (!pick || v > best)) {
        best = v;
        pick = c;
      }
    }
    if (pick) {
      taken[*pick] = 1;
      match[r] = pick;
    }
  }
  return match;
}

std::vector<std::size_t> rank_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace openset
