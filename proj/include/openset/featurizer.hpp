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
#include <bitset>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "openset/datamodel.hpp"
#include "openset/parallel.hpp"

namespace openset {

struct FeatureDump;

inline constexpr std::size_t kNumFeatures = 5;

// Fixed feature ordering shared by featurizer, estimators and model files.
enum class Feature : std::size_t { Nan = 0, Conf = 1, BoxArea = 2, CenterDist = 3, EdgeDist = 4 };

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "f_nan", "p_conf", "s_box", "d_center", "d_edge"};

using FeatureRow = std::array<double, kNumFeatures>;

struct ObjectnessFeatures {
  double f_nan = 0;
  double p_conf = 0;
  double s_box = 0;
  double d_center = 0;
  double d_edge = 0;

  FeatureRow row() const { return {f_nan, p_conf, s_box, d_center, d_edge}; }
  bool operator==(const ObjectnessFeatures&) const = default;
};

// Set of features dropped for ablations. Dropped features read as 0.
class FeatureMask {
 public:
  FeatureMask() = default;

  static FeatureMask dropping(std::initializer_list<Feature> features);
  // Comma-separated feature names, e.g. "f_nan,s_box". Empty string keeps all.
  static FeatureMask parse(std::string_view names);

  bool dropped(Feature f) const { return bits_.test(static_cast<std::size_t>(f)); }
  bool dropped(std::size_t i) const { return bits_.test(i); }
  void drop(Feature f) { bits_.set(static_cast<std::size_t>(f)); }
  bool none() const { return bits_.none(); }

  std::vector<std::string> dropped_names() const;
  std::string to_string() const;
  // Row label in ablation tables, e.g. "w/o NAN" or "full".
  std::string label() const;

  FeatureRow apply(FeatureRow row) const;

  bool operator==(const FeatureMask&) const = default;

 private:
  std::bitset<kNumFeatures> bits_;
};

// Feature matrix tagged with the mask it was built under.
struct FeatureMatrix {
  std::vector<FeatureRow> rows;
  FeatureMask mask;

  std::size_t size() const { return rows.size(); }
};

double max_confidence(std::span<const double> cls);

// Argmax class index (0-based); ties resolve to the lowest index.
std::size_t argmax_class(std::span<const double> cls);

struct BoxGeometry {
  double s_box = 0;
  double d_center = 0;
  double d_edge = 0;
};

BoxGeometry box_geometry(const Box& box, const ImageMeta& meta);

ObjectnessFeatures featurize(const QueryOutput& q, const ImageMeta& meta);

// Per-record, per-query features of a dump.
std::vector<std::vector<ObjectnessFeatures>> featurize_dump(const FeatureDump& dump,
                                                            Exec exec = Exec::Parallel);

FeatureMatrix to_matrix(std::span<const ObjectnessFeatures> features, const FeatureMask& mask);

}  // namespace openset
