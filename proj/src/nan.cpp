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

#include "openset/nan.hpp"

#include <cmath>

#include "openset/error.hpp"

namespace openset {

namespace {

void require_nonempty(std::span<const double> z) {
  if (z.empty()) fail(ErrorKind::EmptyVector, "NAN of an empty vector");
}

}  // namespace

double l1_norm(std::span<const double> z) {
  require_nonempty(z);
  double sum = 0.0;
  for (double v : z) sum += std::abs(v);
  return sum;
}

std::size_t active_count(std::span<const double> z) {
  require_nonempty(z);
  std::size_t inactive = 0;
  for (double v : z) {
    if (v <= 0.0) ++inactive;
  }
  return z.size() - inactive;
}

NanScore nan_score(std::span<const double> z) {
  require_nonempty(z);
  double sum = 0.0;
  std::size_t active = 0;
  for (double v : z) {
    sum += std::abs(v);
    if (v > 0.0) ++active;
  }
  if (active == 0) return {0.0};
  return {sum / static_cast<double>(active)};
}

std::vector<double> nan_scores(std::span<const std::vector<double>> vectors, Exec exec) {
  std::vector<double> out(vectors.size());
  parallel_for(vectors.size(), exec,
               [&](std::size_t i) { out[i] = nan_score(vectors[i]).value; });
  return out;
}

}  // namespace openset
