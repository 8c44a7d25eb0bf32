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
#include <filesystem>
#include <string>
#include <vector>

#include "openset/ingest.hpp"
#include "openset/labeling.hpp"

namespace openset {

// Score-generating parameters for one query role. Confidence is uniform in
// [conf_lo, conf_hi]; the NAN of the feature vector is normal(nan_mean,
// nan_sd), floored at nan_floor.
struct RoleBand {
  double conf_lo = 0;
  double conf_hi = 0;
  double nan_mean = 0;
  double nan_sd = 0;
};

struct SynthConfig {
  int n_images = 50;
  int queries_per_image = 300;
  int feat_dim = 32;
  int n_known_classes = 5;
  // Fractions of each image's queries per planted role; must sum to 1.
  double known_fraction = 0.02;
  double unknown_fraction = 0.015;
  double artifact_fraction = 0.10;
  double background_fraction = 0.865;
  RoleBand known{0.30, 0.98, 2.0, 0.3};
  RoleBand unknown{0.02, 0.45, 1.9, 0.35};
  RoleBand background{0.0, 0.30, 1.0, 0.3};
  // Background queries with high NAN on tiny, edge-hugging boxes.
  RoleBand artifact{0.0, 0.25, 2.1, 0.3};
  double nan_floor = 0.05;
  // Every object query overlaps its ground truth at least this much.
  double min_object_iou = 0.7;
  int min_image_side = 320;
  int max_image_side = 800;
  std::string id_prefix = "img";
  std::uint64_t seed = 7;

  void validate() const;
};

enum class PlantedRole { Known, Unknown, Background, EdgeArtifact };

Role as_role(PlantedRole planted);
std::string_view planted_role_name(PlantedRole planted);

struct SynthData {
  FeatureDump dump;
  AnnotatedDataset dataset;
  std::vector<std::vector<PlantedRole>> roles;  // per record, per query
};

SynthData generate(const SynthConfig& cfg);

// Sidecar truth file: one {"image_id", "roles": [...]} line per image.
void write_planted_roles(const SynthData& data, const std::filesystem::path& path);

}  // namespace openset
