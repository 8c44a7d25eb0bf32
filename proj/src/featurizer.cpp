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

#include "openset/featurizer.hpp"

#include <algorithm>

#include "openset/error.hpp"
#include "openset/ingest.hpp"
#include "openset/nan.hpp"

namespace openset {

namespace {

constexpr std::array<std::string_view, kNumFeatures> kAblationNames = {
    "NAN", "confidence", "box area", "box center to edge", "box edge to edge"};

}  // namespace

FeatureMask FeatureMask::dropping(std::initializer_list<Feature> features) {
  FeatureMask m;
  for (Feature f : features) m.drop(f);
  return m;
}

FeatureMask FeatureMask::parse(std::string_view names) {
  FeatureMask m;
  while (!names.empty()) {
    const auto comma = names.find(',');
    std::string_view token = names.substr(0, comma);
    names = comma == std::string_view::npos ? std::string_view{} : names.substr(comma + 1);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    if (token.empty()) continue;
    const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), token);
    if (it == kFeatureNames.end()) {
      fail(ErrorKind::InvalidArgument, "unknown feature name '" + std::string(token) + "'");
    }
    m.bits_.set(static_cast<std::size_t>(it - kFeatureNames.begin()));
  }
  return m;
}

std::vector<std::string> FeatureMask::dropped_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (bits_.test(i)) out.emplace_back(kFeatureNames[i]);
  }
  return out;
}

std::string FeatureMask::to_string() const {
  std::string out;
  for (const auto& name : dropped_names()) {
    if (!out.empty()) out += ',';
    out += name;
  }
  return out;
}

std::string FeatureMask::label() const {
  if (none()) return "full";
  std::string out = "w/o ";
  bool first = true;
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (!bits_.test(i)) continue;
    if (!first) out += " + ";
    out += kAblationNames[i];
    first = false;
  }
  return out;
}

FeatureRow FeatureMask::apply(FeatureRow row) const {
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    if (bits_.test(i)) row[i] = 0.0;
  }
  return row;
}

double max_confidence(std::span<const double> cls) {
  if (cls.empty()) fail(ErrorKind::EmptyVector, "confidence vector is empty");
  return *std::max_element(cls.begin(), cls.end());
}

std::size_t argmax_class(std::span<const double> cls) {
  if (cls.empty()) fail(ErrorKind::EmptyVector, "confidence vector is empty");
  return static_cast<std::size_t>(std::max_element(cls.begin(), cls.end()) - cls.begin());
}

BoxGeometry box_geometry(const Box& box, const ImageMeta& meta) {
  (void)meta;  // geometry is expressed in normalized image units
  BoxGeometry g;
  g.s_box = std::clamp(box.w * box.h, 0.0, 1.0);
  g.d_center = std::clamp(std::min({box.cx, 1.0 - box.cx, box.cy, 1.0 - box.cy}), 0.0, 0.5);
  const double left = box.cx - 0.5 * box.w;
  const double right = 1.0 - (box.cx + 0.5 * box.w);
  const double top = box.cy - 0.5 * box.h;
  const double bottom = 1.0 - (box.cy + 0.5 * box.h);
  g.d_edge = std::clamp(std::min({left, right, top, bottom}), 0.0, 0.5);
  return g;
}

ObjectnessFeatures featurize(const QueryOutput& q, const ImageMeta& meta) {
  const BoxGeometry g = box_geometry(q.box, meta);
  return {nan_score(q.feat).value, max_confidence(q.cls), g.s_box, g.d_center, g.d_edge};
}

std::vector<std::vector<ObjectnessFeatures>> featurize_dump(const FeatureDump& dump, Exec exec) {
  std::vector<std::vector<ObjectnessFeatures>> out(dump.records.size());
  parallel_for(dump.records.size(), exec, [&](std::size_t i) {
    const auto& rec = dump.records[i];
    auto& feats = out[i];
    feats.reserve(rec.queries.size());
    for (const auto& q : rec.queries) feats.push_back(featurize(q, rec.meta));
  });
  return out;
}

FeatureMatrix to_matrix(std::span<const ObjectnessFeatures> features, const FeatureMask& mask) {
  FeatureMatrix m;
  m.mask = mask;
  m.rows.reserve(features.size());
  for (const auto& f : features) m.rows.push_back(mask.apply(f.row()));
  return m;
}

}  // namespace openset
