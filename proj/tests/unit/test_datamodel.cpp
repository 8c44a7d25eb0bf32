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

#include <cmath>

#include "doctest.h"
#include "openset/datamodel.hpp"
#include "support/gen.hpp"

using namespace openset;

TEST_CASE("iou of a box with itself is 1") {
  const PixelBox a{3, 4, 10, 12};
  CHECK(iou(a, a) == 1.0);
}

TEST_CASE("iou of overlapping squares") {
  CHECK(iou(PixelBox{0, 0, 2, 2}, PixelBox{1, 1, 3, 3}) == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("iou of disjoint and degenerate boxes is 0") {
  CHECK(iou(PixelBox{0, 0, 1, 1}, PixelBox{2, 2, 3, 3}) == 0.0);
  CHECK(iou(PixelBox{0, 0, 1, 1}, PixelBox{1, 0, 2, 1}) == 0.0);  // touching edge
  CHECK(iou(PixelBox{1, 1, 1, 5}, PixelBox{0, 0, 4, 4}) == 0.0);  // zero width
  CHECK(iou(PixelBox{1, 1, 1, 1}, PixelBox{1, 1, 1, 1}) == 0.0);  // zero area with itself
}

TEST_CASE("iou in normalized form uses pixel coordinates") {
  const ImageMeta meta{"a", 200, 100};
  const Box a{0.25, 0.5, 0.5, 1.0};  // left half
  const Box b{0.5, 0.5, 0.5, 1.0};   // middle half
  CHECK(iou(a, b, meta) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou properties on random boxes") {
  gen::Gen g(11);
  for (int i = 0; i < 2000; ++i) {
    const ImageMeta meta{"m", g.integer(1, 1000), g.integer(1, 1000)};
    const Box a = g.box(0.0, 1.0), b = g.box(0.0, 1.0);
    const double ab = iou(a, b, meta);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(ab == iou(b, a, meta));
    if (a.w > 0 && a.h > 0) CHECK(iou(a, a, meta) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("box conversion round-trips") {
  gen::Gen g(12);
  for (int i = 0; i < 2000; ++i) {
    const ImageMeta meta{"m", g.integer(1, 4000), g.integer(1, 4000)};
    const Box b = g.box(0.0, 1.0);
    const PixelBox px = b.to_pixels(meta);
    CHECK(px.x1 <= px.x2);
    CHECK(px.y1 <= px.y2);
    const Box back = Box::from_pixels(px, meta);
    CHECK(std::abs(back.cx - b.cx) <= 1e-9 * std::max(1.0, b.cx));
    CHECK(std::abs(back.cy - b.cy) <= 1e-9 * std::max(1.0, b.cy));
    CHECK(std::abs(back.w - b.w) <= 1e-9);
    CHECK(std::abs(back.h - b.h) <= 1e-9);
  }
}

TEST_CASE("xywh annotation boxes convert to center form") {
  const ImageMeta meta{"m", 100, 50};
  const Box b = Box::from_xywh(10, 5, 20, 10, meta);
  CHECK(b.cx == doctest::Approx(0.2));
  CHECK(b.cy == doctest::Approx(0.2));
  CHECK(b.w == doctest::Approx(0.2));
  CHECK(b.h == doctest::Approx(0.2));
}

TEST_CASE("box validity") {
  CHECK(Box{0.5, 0.5, 1, 1}.valid());
  CHECK(Box{0, 0, 0, 0}.valid());
  CHECK_FALSE(Box{1.1, 0.5, 0.1, 0.1}.valid());
  CHECK_FALSE(Box{0.5, 0.5, -0.1, 0.1}.valid());
  CHECK_FALSE(Box{0.5, NAN, 0.1, 0.1}.valid());
}
