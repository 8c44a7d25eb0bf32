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

#include "openset/datamodel.hpp"

#include <algorithm>

namespace openset {

namespace {

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

double PixelBox::area() const {
  return std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1);
}

bool Box::valid() const { return unit(cx) && unit(cy) && unit(w) && unit(h); }

PixelBox Box::to_pixels(const ImageMeta& meta) const {
  const double W = meta.width, H = meta.height;
  return {(cx - 0.5 * w) * W, (cy - 0.5 * h) * H, (cx + 0.5 * w) * W, (cy + 0.5 * h) * H};
}

Box Box::from_pixels(const PixelBox& px, const ImageMeta& meta) {
  const double W = meta.width, H = meta.height;
  return {0.5 * (px.x1 + px.x2) / W, 0.5 * (px.y1 + px.y2) / H, (px.x2 - px.x1) / W,
          (px.y2 - px.y1) / H};
}

Box Box::from_xywh(double x, double y, double w, double h, const ImageMeta& meta) {
  return from_pixels({x, y, x + w, y + h}, meta);
}

double iou(const PixelBox& a, const PixelBox& b) {
  const double area_a = a.area();
  const double area_b = b.area();
  if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return std::clamp(inter / (area_a + area_b - inter), 0.0, 1.0);
}

double iou(const Box& a, const Box& b, const ImageMeta& meta) {
  return iou(a.to_pixels(meta), b.to_pixels(meta));
}

}  // namespace openset
