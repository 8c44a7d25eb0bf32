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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "openset/datamodel.hpp"

namespace openset {

struct DumpRecord {
  ImageMeta meta;
  std::vector<QueryOutput> queries;

  bool operator==(const DumpRecord&) const = default;
};

// Per-image detector outputs. Serialized as JSON lines: an optional header
// line {"header": {...}} followed by one image per line,
// {"image_id", "width", "height", "queries": [{"feat", "cls", "box"}, ...]}.
struct FeatureDump {
  std::vector<DumpRecord> records;
  std::size_t feat_dim = 0;
  std::size_t num_classes = 0;
  // Free-form provenance written by the producer, e.g. which decoder tensor
  // was captured.
  std::map<std::string, std::string> metadata;

  const DumpRecord* find(std::string_view image_id) const;
  bool operator==(const FeatureDump&) const = default;
};

struct KnownCategory {
  int id = 0;  // category id as it appears in annotation files
  std::string name;

  bool operator==(const KnownCategory&) const = default;
};

// Ordered known category set. The i-th entry is class id i + 1 and lines up
// with cls[i] of every query.
struct KnownCategories {
  std::vector<KnownCategory> categories;

  std::optional<int> class_of(int category_id) const;
  std::size_t size() const { return categories.size(); }
  bool operator==(const KnownCategories&) const = default;
};

struct AnnotatedDataset {
  std::vector<ImageMeta> images;
  std::map<std::string, std::vector<GroundTruth>> ground_truths;
  KnownCategories known;

  const ImageMeta* find_image(std::string_view image_id) const;
  // Empty list for images without annotations.
  const std::vector<GroundTruth>& gts(std::string_view image_id) const;
  std::size_t count_known() const;
  std::size_t count_unknown() const;

  bool operator==(const AnnotatedDataset&) const = default;
};

using Predictions = std::map<std::string, std::vector<Detection>>;

// Category id used when writing unknown ground truths back to COCO form.
inline constexpr int kUnknownCategoryId = 1000;

FeatureDump parse_feature_dump(std::istream& in, const std::string& source = "<stream>");
FeatureDump load_feature_dump(const std::filesystem::path& path);
void write_feature_dump(const FeatureDump& dump, std::ostream& out);
void write_feature_dump(const FeatureDump& dump, const std::filesystem::path& path);

// Known categories config: {"known_categories": [{"id", "name"}, ...]}.
KnownCategories load_known_categories(const std::filesystem::path& path);
void write_known_categories(const KnownCategories& known, const std::filesystem::path& path);

// COCO-style document. Without an explicit known set, every entry of the
// document's "categories" array is known. Category ids outside the known set
// become unknown ground truths.
AnnotatedDataset parse_annotations(std::string_view text,
                                   const std::optional<KnownCategories>& known,
                                   const std::string& source = "<string>");
AnnotatedDataset load_annotations(const std::filesystem::path& path,
                                  const std::optional<KnownCategories>& known = std::nullopt);
std::string serialize_annotations(const AnnotatedDataset& dataset);
void write_annotations(const AnnotatedDataset& dataset, const std::filesystem::path& path);

Predictions parse_predictions(std::istream& in, const std::string& source = "<stream>");
Predictions load_predictions(const std::filesystem::path& path);
void write_predictions(const Predictions& preds, std::ostream& out);
void write_predictions(const Predictions& preds, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace openset
