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

#include "openset/ingest.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "openset/error.hpp"

namespace openset {

using nlohmann::json;

namespace {

constexpr std::string_view kDumpFormat = "openset-feature-dump";
constexpr std::string_view kPredictionsFormat = "openset-predictions";
constexpr int kFormatVersion = 1;

const std::vector<GroundTruth> kNoGroundTruth;

std::string where(const DumpRecord& rec, std::size_t q) {
  return "image '" + rec.meta.image_id + "' query " + std::to_string(q);
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

json parse_line(const std::string& line, const std::string& source, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, lineno, e.what());
  }
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

// image ids are strings in our files, integers in COCO files.
std::string id_string(const json& v, const std::string& what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw SchemaError(what + ": image id must be a string or integer");
}

double finite_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw SchemaError(what + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(what + ": non-finite value");
  return d;
}

int positive_int(const json& v, const std::string& what) {
  if (!v.is_number_integer() || v.get<long long>() <= 0) {
    throw SchemaError(what + ": expected a positive integer");
  }
  return v.get<int>();
}

const json& member(const json& obj, const char* key, const std::string& what) {
  if (!obj.is_object()) throw SchemaError(what + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(what + ": missing field '" + key + "'");
  return *it;
}

std::vector<double> number_array(const json& v, const std::string& what) {
  if (!v.is_array()) throw SchemaError(what + ": expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(finite_number(x, what));
  return out;
}

Box parse_box(const json& v, const std::string& what) {
  const auto vals = number_array(v, what + " box");
  if (vals.size() != 4) throw SchemaError(what + ": box must have 4 components");
  Box b{vals[0], vals[1], vals[2], vals[3]};
  if (!b.valid()) throw SchemaError(what + ": box components must lie in [0, 1]");
  return b;
}

json box_json(const Box& b) { return json::array({b.cx, b.cy, b.w, b.h}); }

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

void check_written(std::ostream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) fail(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

DumpRecord parse_record(const json& j, FeatureDump& dump, bool& dims_known) {
  DumpRecord rec;
  rec.meta.image_id = id_string(member(j, "image_id", "record"), "record");
  const std::string img = "image '" + rec.meta.image_id + "'";
  rec.meta.width = positive_int(member(j, "width", img), img + " width");
  rec.meta.height = positive_int(member(j, "height", img), img + " height");
  const json& queries = member(j, "queries", img);
  if (!queries.is_array()) throw SchemaError(img + ": queries must be an array");
  rec.queries.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const std::string w = where(rec, q);
    QueryOutput out;
    out.feat = number_array(member(queries[q], "feat", w), w + " feat");
    out.cls = number_array(member(queries[q], "cls", w), w + " cls");
    out.box = parse_box(member(queries[q], "box", w), w);
    if (!dims_known) {
      dump.feat_dim = out.feat.size();
      dump.num_classes = out.cls.size();
      dims_known = true;
    }
    if (out.feat.size() != dump.feat_dim) {
      throw SchemaError(w + ": feat has length " + std::to_string(out.feat.size()) +
                        ", expected " + std::to_string(dump.feat_dim));
    }
    if (out.cls.size() != dump.num_classes) {
      throw SchemaError(w + ": cls has length " + std::to_string(out.cls.size()) +
                        ", expected " + std::to_string(dump.num_classes));
    }
    for (double c : out.cls) {
      if (c < 0.0 || c > 1.0) throw SchemaError(w + ": cls value outside [0, 1]");
    }
    rec.queries.push_back(std::move(out));
  }
  return rec;
}

}  // namespace

const DumpRecord* FeatureDump::find(std::string_view image_id) const {
  for (const auto& r : records) {
    if (r.meta.image_id == image_id) return &r;
  }
  return nullptr;
}

std::optional<int> KnownCategories::class_of(int category_id) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i].id == category_id) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

const ImageMeta* AnnotatedDataset::find_image(std::string_view image_id) const {
  for (const auto& m : images) {
    if (m.image_id == image_id) return &m;
  }
  return nullptr;
}

const std::vector<GroundTruth>& AnnotatedDataset::gts(std::string_view image_id) const {
  const auto it = ground_truths.find(std::string(image_id));
  return it == ground_truths.end() ? kNoGroundTruth : it->second;
}

std::size_t AnnotatedDataset::count_known() const {
  std::size_t n = 0;
  for (const auto& [id, list] : ground_truths) {
    for (const auto& g : list) n += g.is_known() ? 1 : 0;
  }
  return n;
}

std::size_t AnnotatedDataset::count_unknown() const {
  std::size_t n = 0;
  for (const auto& [id, list] : ground_truths) {
    for (const auto& g : list) n += g.is_known() ? 0 : 1;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Feature dumps

FeatureDump parse_feature_dump(std::istream& in, const std::string& source) {
  FeatureDump dump;
  std::set<std::string> seen;
  bool dims_known = false;
  std::string line;
  std::size_t lineno = 0;
  std::size_t content_lines = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const json j = parse_line(line, source, lineno);
    try {
      if (j.is_object() && j.contains("header")) {
        if (content_lines++ > 0) throw SchemaError("header must be the first line");
        const json& h = j["header"];
        if (member(h, "format", "header") != kDumpFormat) {
          throw SchemaError("header: not a feature dump");
        }
        if (member(h, "version", "header") != kFormatVersion) {
          throw SchemaError("header: unsupported version");
        }
        dump.feat_dim = member(h, "feat_dim", "header").get<std::size_t>();
        dump.num_classes = member(h, "num_classes", "header").get<std::size_t>();
        dims_known = true;
        if (const auto it = h.find("metadata"); it != h.end()) {
          for (const auto& [k, v] : it->items()) {
            dump.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
          }
        }
        continue;
      }
      ++content_lines;
      DumpRecord rec = parse_record(j, dump, dims_known);
      if (!seen.insert(rec.meta.image_id).second) {
        throw SchemaError("duplicate image id '" + rec.meta.image_id + "'");
      }
      dump.records.push_back(std::move(rec));
    } catch (const SchemaError& e) {
      throw SchemaError(source + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const json::exception& e) {
      throw SchemaError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return dump;
}

FeatureDump load_feature_dump(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_feature_dump(in, path.string());
}

void write_feature_dump(const FeatureDump& dump, std::ostream& out) {
  json header = {{"format", kDumpFormat},
                 {"version", kFormatVersion},
                 {"feat_dim", dump.feat_dim},
                 {"num_classes", dump.num_classes}};
  if (!dump.metadata.empty()) header["metadata"] = dump.metadata;
  out << json{{"header", header}}.dump() << '\n';
  for (const auto& rec : dump.records) {
    json queries = json::array();
    for (const auto& q : rec.queries) {
      queries.push_back({{"feat", q.feat}, {"cls", q.cls}, {"box", box_json(q.box)}});
    }
    out << json{{"image_id", rec.meta.image_id},
                {"width", rec.meta.width},
                {"height", rec.meta.height},
                {"queries", std::move(queries)}}
               .dump()
        << '\n';
  }
}

void write_feature_dump(const FeatureDump& dump, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_feature_dump(dump, out);
  check_written(out, path);
}

// ---------------------------------------------------------------------------
// Known categories and COCO annotations

namespace {

KnownCategories parse_category_array(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw SchemaError(what + ": expected an array of categories");
  KnownCategories known;
  for (const auto& c : arr) {
    const json& id = member(c, "id", what);
    if (!id.is_number_integer()) throw SchemaError(what + ": category id must be an integer");
    KnownCategory cat{id.get<int>(), ""};
    if (const auto it = c.find("name"); it != c.end() && it->is_string()) {
      cat.name = it->get<std::string>();
    }
    if (known.class_of(cat.id)) {
      throw SchemaError(what + ": duplicate category id " + std::to_string(cat.id));
    }
    known.categories.push_back(std::move(cat));
  }
  return known;
}

json category_array(const KnownCategories& known) {
  json arr = json::array();
  for (const auto& c : known.categories) arr.push_back({{"id", c.id}, {"name", c.name}});
  return arr;
}

}  // namespace

KnownCategories load_known_categories(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), line_of_offset(text, e.byte), e.what());
  }
  const json& arr = j.is_array() ? j : member(j, "known_categories", path.string());
  KnownCategories known = parse_category_array(arr, path.string());
  if (known.categories.empty()) throw SchemaError(path.string() + ": known set is empty");
  return known;
}

void write_known_categories(const KnownCategories& known, const std::filesystem::path& path) {
  write_text_file(path, json{{"known_categories", category_array(known)}}.dump(2) + "\n");
}

AnnotatedDataset parse_annotations(std::string_view text,
                                   const std::optional<KnownCategories>& known,
                                   const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, line_of_offset(text, e.byte), e.what());
  }
  AnnotatedDataset ds;
  try {
    ds.known = known ? *known
                     : (doc.contains("categories")
                            ? parse_category_array(doc["categories"], source + " categories")
                            : KnownCategories{});
    if (ds.known.categories.empty()) throw SchemaError("known category set is empty");

    const json& images = member(doc, "images", source);
    if (!images.is_array()) throw SchemaError("images must be an array");
    std::map<std::string, std::size_t> index;
    for (const auto& im : images) {
      ImageMeta meta;
      meta.image_id = id_string(member(im, "id", "image"), "image");
      const std::string what = "image '" + meta.image_id + "'";
      meta.width = positive_int(member(im, "width", what), what + " width");
      meta.height = positive_int(member(im, "height", what), what + " height");
      if (!index.emplace(meta.image_id, ds.images.size()).second) {
        throw SchemaError("duplicate image id '" + meta.image_id + "'");
      }
      ds.images.push_back(std::move(meta));
    }

    const json empty = json::array();
    const json& anns = doc.contains("annotations") ? doc["annotations"] : empty;
    if (!anns.is_array()) throw SchemaError("annotations must be an array");
    for (std::size_t a = 0; a < anns.size(); ++a) {
      const std::string what = "annotation " + std::to_string(a);
      const std::string image_id = id_string(member(anns[a], "image_id", what), what);
      const auto it = index.find(image_id);
      if (it == index.end()) {
        fail(ErrorKind::DanglingReference,
             source + ": " + what + " references missing image '" + image_id + "'");
      }
      const ImageMeta& meta = ds.images[it->second];
      const json& cat = member(anns[a], "category_id", what);
      if (!cat.is_number_integer()) throw SchemaError(what + ": category_id must be an integer");
      const auto bbox = number_array(member(anns[a], "bbox", what), what + " bbox");
      if (bbox.size() != 4) throw SchemaError(what + ": bbox must have 4 components");
      if (bbox[2] < 0.0 || bbox[3] < 0.0) throw SchemaError(what + ": negative bbox size");
      // Annotation tools round coordinates and can spill past the border.
      const double W = meta.width, H = meta.height;
      PixelBox px{std::clamp(bbox[0], 0.0, W), std::clamp(bbox[1], 0.0, H),
                  std::clamp(bbox[0] + bbox[2], 0.0, W), std::clamp(bbox[1] + bbox[3], 0.0, H)};
      GroundTruth gt;
      gt.box = Box::from_pixels(px, meta);
      gt.box = {std::clamp(gt.box.cx, 0.0, 1.0), std::clamp(gt.box.cy, 0.0, 1.0),
                std::clamp(gt.box.w, 0.0, 1.0), std::clamp(gt.box.h, 0.0, 1.0)};
      gt.known_class = ds.known.class_of(cat.get<int>());
      ds.ground_truths[image_id].push_back(gt);
    }
  } catch (const json::exception& e) {
    throw SchemaError(source + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(source + ": " + e.what());
  }
  return ds;
}

AnnotatedDataset load_annotations(const std::filesystem::path& path,
                                  const std::optional<KnownCategories>& known) {
  return parse_annotations(read_text_file(path), known, path.string());
}

std::string serialize_annotations(const AnnotatedDataset& ds) {
  json images = json::array();
  json anns = json::array();
  long long next_id = 1;
  for (const auto& meta : ds.images) {
    images.push_back({{"id", meta.image_id}, {"width", meta.width}, {"height", meta.height}});
    for (const auto& gt : ds.gts(meta.image_id)) {
      const PixelBox px = gt.box.to_pixels(meta);
      const int category =
          gt.known_class ? ds.known.categories.at(*gt.known_class - 1).id : kUnknownCategoryId;
      anns.push_back({{"id", next_id++},
                      {"image_id", meta.image_id},
                      {"category_id", category},
                      {"bbox", {px.x1, px.y1, px.x2 - px.x1, px.y2 - px.y1}},
                      {"area", px.area()},
                      {"iscrowd", 0}});
    }
  }
  return json{{"images", images}, {"annotations", anns}, {"categories", category_array(ds.known)}}
             .dump() +
         "\n";
}

void write_annotations(const AnnotatedDataset& dataset, const std::filesystem::path& path) {
  write_text_file(path, serialize_annotations(dataset));
}

// ---------------------------------------------------------------------------
// Predictions

namespace {

std::string_view decision_name(Decision d) {
  switch (d) {
    case Decision::Known: return "known";
    case Decision::Unknown: return "unknown";
    case Decision::Background: return "background";
  }
  return "background";
}

Decision parse_decision(const json& v, const std::string& what) {
  if (v == "known") return Decision::Known;
  if (v == "unknown") return Decision::Unknown;
  if (v == "background") return Decision::Background;
  throw SchemaError(what + ": unknown decision");
}

double unit_number(const json& v, const std::string& what) {
  const double d = finite_number(v, what);
  if (d < 0.0 || d > 1.0) throw SchemaError(what + ": value outside [0, 1]");
  return d;
}

}  // namespace

Predictions parse_predictions(std::istream& in, const std::string& source) {
  Predictions preds;
  std::string line;
  std::size_t lineno = 0;
  std::size_t content_lines = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    const json j = parse_line(line, source, lineno);
    try {
      if (content_lines++ > 0 && j.is_object() && j.contains("header")) {
        throw SchemaError("header must be the first line");
      }
      if (j.is_object() && j.contains("header")) {
        if (member(j["header"], "format", "header") != kPredictionsFormat) {
          throw SchemaError("header: not a predictions file");
        }
        if (member(j["header"], "version", "header") != kFormatVersion) {
          throw SchemaError("header: unsupported version");
        }
        continue;
      }
      const std::string id = id_string(member(j, "image_id", "record"), "record");
      const json& dets = member(j, "detections", "image '" + id + "'");
      if (!dets.is_array()) throw SchemaError("detections must be an array");
      std::vector<Detection> list;
      list.reserve(dets.size());
      for (std::size_t k = 0; k < dets.size(); ++k) {
        const std::string what = "image '" + id + "' detection " + std::to_string(k);
        Detection d;
        d.box = parse_box(member(dets[k], "box", what), what);
        d.decision = parse_decision(member(dets[k], "decision", what), what);
        if (d.decision == Decision::Known) {
          const json& c = member(dets[k], "class_id", what);
          if (!c.is_number_integer() || c.get<int>() < 1) {
            throw SchemaError(what + ": class_id must be a positive integer");
          }
          d.class_id = c.get<int>();
        }
        d.confidence = unit_number(member(dets[k], "confidence", what), what + " confidence");
        d.objectness = unit_number(member(dets[k], "objectness", what), what + " objectness");
        list.push_back(d);
      }
      if (!preds.emplace(id, std::move(list)).second) {
        throw SchemaError("duplicate image id '" + id + "'");
      }
    } catch (const SchemaError& e) {
      throw SchemaError(source + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const json::exception& e) {
      throw SchemaError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return preds;
}

Predictions load_predictions(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_predictions(in, path.string());
}

void write_predictions(const Predictions& preds, std::ostream& out) {
  out << json{{"header", {{"format", kPredictionsFormat}, {"version", kFormatVersion}}}}.dump()
      << '\n';
  for (const auto& [id, dets] : preds) {
    json arr = json::array();
    for (const auto& d : dets) {
      json jd = {{"box", box_json(d.box)},
                 {"decision", decision_name(d.decision)},
                 {"confidence", d.confidence},
                 {"objectness", d.objectness}};
      if (d.decision == Decision::Known) jd["class_id"] = d.class_id;
      arr.push_back(std::move(jd));
    }
    out << json{{"image_id", id}, {"detections", std::move(arr)}}.dump() << '\n';
  }
}

void write_predictions(const Predictions& preds, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_predictions(preds, out);
  check_written(out, path);
}

// ---------------------------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, "read from '" + path.string() + "' failed");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  auto out = open_out(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  check_written(out, path);
}

}  // namespace openset
