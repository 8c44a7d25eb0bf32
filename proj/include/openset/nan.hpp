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
#include <span>
#include <vector>

#include "openset/parallel.hpp"

namespace openset {

// Negative-aware norm of a hidden activation vector: the l1 norm divided by
// the number of strictly positive components. A vector with no positive
// component scores 0.
struct NanScore {
  double value = 0;
};

double l1_norm(std::span<const double> z);

// Components with z_i <= 0 are inactive.
std::size_t active_count(std::span<const double> z);

NanScore nan_score(std::span<const double> z);

// Batch scoring over many vectors (one per query).
std::vector<double> nan_scores(std::span<const std::vector<double>> vectors,
                               Exec exec = Exec::Parallel);

}  // namespace openset
