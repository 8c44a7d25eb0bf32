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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "openset/inference.hpp"
#include "openset/ingest.hpp"
#include "openset/labeling.hpp"
#include "openset/objectness_model.hpp"
#include "openset/parallel.hpp"

namespace openset {

// Exact 1-D Wasserstein-1 distance between two empirical samples: the
// integral of |F_a - F_b|, accumulated over the merged sorted support.
double wasserstein1(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kKdeGridPoints = 512;

// Silverman's rule: 0.9 * min(sd, IQR / 1.34) * n^(-1/5). Falls back to sd
// when the IQR is zero.
double silverman_bandwidth(std::span<const double> samples);

struct KdeCurve {
  double bandwidth = 0;
  std::vector<double> x;
  std::vector<double> density;
};

// Gaussian KDE on kKdeGridPoints points spanning [min - 3h, max + 3h].
KdeCurve kde(std::span<const double> samples, std::optional<double> bandwidth = std::nullopt,
             Exec exec = Exec::Parallel);

enum class ScoreKind { Confidence, Nan, Objectness };
inline constexpr std::array<std::string_view, 3> kScoreNames = {"confidence", "nan", "objectness"};
inline constexpr std::array<std::string_view, 3> kRoleNames = {"known", "unknown", "background"};

struct SeparationRow {
  std::optional<double> bg_known;
  std::optional<double> bg_unknown;
  std::optional<double> unknown_known;
};

struct SeparationReport {
  std::array<SeparationRow, 3> table;  // indexed by ScoreKind
  // curves[score][role], role indexed like kRoleNames; empty when the role has
  // fewer than two samples or no spread.
  std::array<std::array<std::optional<KdeCurve>, 3>, 3> curves;
  std::array<std::size_t, 3> role_counts{};
  std::vector<std::string> warnings;
};

// Roles from the labeling matcher (IoU 0.5), all queries pooled.
SeparationReport separation_report(const ScoredDump& scored, const AnnotatedDataset& dataset,
                                   Exec exec = Exec::Parallel);
SeparationReport separation_report(const FeatureDump& dump, const AnnotatedDataset& dataset,
                                   const ObjectnessModel& model, Exec exec = Exec::Parallel);

std::string serialize_separation(const SeparationReport& report);
// Columns: score, role, x, density.
std::string kde_plot_data(const SeparationReport& report);
std::string format_separation_table(const SeparationReport& report);

}  // namespace openset
