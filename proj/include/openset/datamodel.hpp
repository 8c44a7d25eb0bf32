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

#include <optional>
#include <string>
#include <vector>

namespace openset {

struct ImageMeta {
  std::string image_id;
  int width = 0;
  int height = 0;

  bool operator==(const ImageMeta&) const = default;
};

// Absolute corner form in pixels.
struct PixelBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double area() const;
};

// Center-normalized box (cx, cy, w, h), every component in [0, 1].
struct Box {
  double cx = 0, cy = 0, w = 0, h = 0;

  bool valid() const;
  PixelBox to_pixels(const ImageMeta& meta) const;
  static Box from_pixels(const PixelBox& px, const ImageMeta& meta);
  // COCO annotation form: top-left corner plus size, in pixels.
  static Box from_xywh(double x, double y, double w, double h, const ImageMeta& meta);

  bool operator==(const Box&) const = default;
};

double iou(const PixelBox& a, const PixelBox& b);
double iou(const Box& a, const Box& b, const ImageMeta& meta);

struct GroundTruth {
  Box box;
  // Contiguous known class id in 1..C; empty for an unknown object.
  std::optional<int> known_class;

  bool is_known() const { return known_class.has_value(); }
  bool operator==(const GroundTruth&) const = default;
};

struct QueryOutput {
  std::vector<double> feat;
  std::vector<double> cls;
  Box box;

  bool operator==(const QueryOutput&) const = default;
};

enum class Decision { Known, Unknown, Background };

struct Detection {
  Box box;
  Decision decision = Decision::Background;
  int class_id = 0;  // meaningful only for Decision::Known
  double confidence = 0;
  double objectness = 0;

  bool operator==(const Detection&) const = default;
};

}  // namespace openset
