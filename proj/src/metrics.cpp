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

#include "openset/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "openset/error.hpp"
#include "openset/matching.hpp"

namespace openset {

using nlohmann::json;

std::array<double, 10> coco_iou_thresholds() {
  std::array<double, 10> t{};
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(50 + 5 * i) / 100.0;
  return t;
}

std::size_t ClassGroundTruth::count() const {
  std::size_t n = 0;
  for (const auto& b : boxes) n += b.size();
  return n;
}

double ap_from_ranked_tp(std::span<const char> tp, std::size_t n_gt, ApInterpolation interp) {
  if (n_gt == 0 || tp.empty()) return 0.0;
  const std::size_t n = tp.size();
  std::vector<double> prec(n), rec(n);
  std::size_t tps = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tps += tp[k] ? 1 : 0;
    prec[k] = static_cast<double>(tps) / static_cast<double>(k + 1);
    rec[k] = static_cast<double>(tps) / static_cast<double>(n_gt);
  }
  for (std::size_t k = n - 1; k-- > 0;) prec[k] = std::max(prec[k], prec[k + 1]);

  if (interp == ApInterpolation::Coco101) {
    double sum = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double r = static_cast<double>(i) / 100.0;
      const auto it = std::lower_bound(rec.begin(), rec.end(), r);
      if (it != rec.end()) sum += prec[static_cast<std::size_t>(it - rec.begin())];
    }
    return sum / 101.0;
  }
  // All-point: sum of envelope precision over every recall increment.
  double sum = 0.0, last_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (rec[k] > last_recall) {
      sum += (rec[k] - last_recall) * prec[k];
      last_recall = rec[k];
    }
  }
  return sum;
}

namespace {

// Predictions lined up with the dataset's image order.
struct Aligned {
  std::span<const ImageMeta> images;
  std::vector<const std::vector<Detection>*> dets;
  const AnnotatedDataset* dataset = nullptr;

  const std::vector<GroundTruth>& gts(std::size_t i) const {
    return dataset->gts(images[i].image_id);
  }
};

const std::vector<Detection> kNoDetections;

Aligned align(const Predictions& preds, const AnnotatedDataset& dataset) {
  Aligned a;
  a.images = dataset.images;
  a.dataset = &dataset;
  a.dets.assign(dataset.images.size(), &kNoDetections);
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < dataset.images.size(); ++i) index.emplace(dataset.images[i].image_id, i);
  for (const auto& [id, list] : preds) {
    const auto it = index.find(id);
    if (it == index.end()) {
      fail(ErrorKind::MissingImage, "predictions reference image '" + id + "' not in the annotations");
    }
    a.dets[it->second] = &list;
  }
  return a;
}

std::vector<RankedDetection> sort_ranked(std::span<const RankedDetection> dets) {
  std::vector<RankedDetection> sorted(dets.begin(), dets.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const RankedDetection& a, const RankedDetection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.image < b.image;
  });
  return sorted;
}

// tp[t][k]: whether the k-th ranked detection is a TP at thresholds[t].
std::vector<std::vector<char>> match_ranked(std::span<const RankedDetection> sorted,
                                            const ClassGroundTruth& gts,
                                            std::span<const double> thresholds, Exec exec) {
  std::vector<std::vector<char>> tp(thresholds.size(), std::vector<char>(sorted.size(), 0));
  std::vector<std::vector<std::size_t>> by_image(gts.images.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) by_image.at(sorted[k].image).push_back(k);

  parallel_for(by_image.size(), exec, [&](std::size_t img) {
    const auto& ranks = by_image[img];
    const auto& boxes = gts.boxes[img];
    if (ranks.empty() || boxes.empty()) return;
    const ImageMeta& meta = gts.images[img];
    std::vector<PixelBox> d_px, g_px;
    for (std::size_t k : ranks) d_px.push_back(sorted[k].box.to_pixels(meta));
    for (const auto& b : boxes) g_px.push_back(b.to_pixels(meta));
    const IouMatrix m = IouMatrix::between(d_px, g_px);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      const auto match = greedy_match(m, thresholds[t]);
      for (std::size_t r = 0; r < ranks.size(); ++r) tp[t][ranks[r]] = match[r] ? 1 : 0;
    }
  });
  return tp;
}

ClassGroundTruth class_gts(const Aligned& a, const std::optional<int>& known_class) {
  ClassGroundTruth g;
  g.images = a.images;
  g.boxes.resize(a.images.size());
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    for (const auto& gt : a.gts(i)) {
      if (gt.known_class == known_class) g.boxes[i].push_back(gt.box);
    }
  }
  return g;
}

using PerIou = std::array<double, 10>;

std::map<int, PerIou> known_class_aps(const Aligned& a, const EvalOptions& opts) {
  const auto thresholds = coco_iou_thresholds();
  std::map<int, std::vector<RankedDetection>> dets_by_class;
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    for (const auto& d : *a.dets[i]) {
      if (d.decision == Decision::Known) dets_by_class[d.class_id].push_back({i, d.box, d.confidence});
    }
  }
  std::map<int, PerIou> out;
  const int n_classes = static_cast<int>(a.dataset->known.size());
  for (int c = 1; c <= n_classes; ++c) {
    const ClassGroundTruth g = class_gts(a, c);
    const std::size_t n_gt = g.count();
    if (n_gt == 0) continue;
    const auto sorted = sort_ranked(dets_by_class[c]);
    const auto tp = match_ranked(sorted, g, thresholds, opts.exec);
    PerIou ap{};
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      ap[t] = ap_from_ranked_tp(tp[t], n_gt, opts.interpolation);
    }
    out[c] = ap;
  }
  return out;
}

double mean(const PerIou& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

UnknownScores unknown_scores(const Aligned& a, const EvalOptions& opts) {
  const auto thresholds = coco_iou_thresholds();
  const ClassGroundTruth g = class_gts(a, std::nullopt);
  const std::size_t n_gt = g.count();
  if (n_gt == 0) fail(ErrorKind::NoUnknownGroundTruth, "dataset has no unknown ground truth");
  std::vector<RankedDetection> dets;
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    for (const auto& d : *a.dets[i]) {
      if (d.decision == Decision::Unknown) dets.push_back({i, d.box, d.confidence});
    }
  }
  const auto sorted = sort_ranked(dets);
  const auto tp = match_ranked(sorted, g, thresholds, opts.exec);
  UnknownScores s;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    const auto hits = static_cast<std::size_t>(std::count(tp[t].begin(), tp[t].end(), char{1}));
    s.recall_at[t] = static_cast<double>(hits) / static_cast<double>(n_gt);
    s.ap_at[t] = ap_from_ranked_tp(tp[t], n_gt, opts.interpolation);
  }
  s.recall = mean(s.recall_at);
  s.ap = mean(s.ap_at);
  return s;
}

WildernessImpact wi_impl(const Aligned& a, double recall_level, Exec exec) {
  if (!(recall_level > 0.0 && recall_level <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "recall level must be in (0, 1]");
  }
  constexpr double kIou = 0.5;
  struct Pooled {
    std::size_t image;
    std::size_t index;
    double confidence;
  };
  std::vector<Pooled> pooled;
  for (std::size_t i = 0; i < a.images.size(); ++i) {
    const auto& list = *a.dets[i];
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (list[k].decision == Decision::Known) pooled.push_back({i, k, list[k].confidence});
    }
  }
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const Pooled& x, const Pooled& y) { return x.confidence > y.confidence; });

  // 0 = FP on background, 1 = TP on a known object, 2 = FP on an unknown object.
  std::vector<std::vector<std::size_t>> by_image(a.images.size());
  for (std::size_t r = 0; r < pooled.size(); ++r) by_image[pooled[r].image].push_back(r);
  std::vector<char> outcome(pooled.size(), 0);
  parallel_for(by_image.size(), exec, [&](std::size_t img) {
    const auto& ranks = by_image[img];
    if (ranks.empty()) return;
    const ImageMeta& meta = a.images[img];
    const auto& list = *a.dets[img];
    const auto& gts = a.gts(img);
    std::map<int, std::vector<std::size_t>> det_by_class;
    for (std::size_t r : ranks) det_by_class[list[pooled[r].index].class_id].push_back(r);
    for (const auto& [cls, members] : det_by_class) {
      std::vector<PixelBox> d_px, g_px;
      for (std::size_t r : members) d_px.push_back(list[pooled[r].index].box.to_pixels(meta));
      for (const auto& g : gts) {
        if (g.known_class == cls) g_px.push_back(g.box.to_pixels(meta));
      }
      const auto match = greedy_match(IouMatrix::between(d_px, g_px), kIou);
      for (std::size_t j = 0; j < members.size(); ++j) outcome[members[j]] = match[j] ? 1 : 0;
    }
    for (std::size_t r : ranks) {
      if (outcome[r] == 1) continue;
      const PixelBox d = list[pooled[r].index].box.to_pixels(meta);
      for (const auto& g : gts) {
        if (!g.is_known() && iou(d, g.box.to_pixels(meta)) >= kIou) {
          outcome[r] = 2;
          break;
        }
      }
    }
  });

  const std::size_t n_known = a.dataset->count_known();
  WildernessImpact wi;
  wi.recall_reached = false;
  std::size_t tp = 0;
  std::size_t cut = pooled.size();
  for (std::size_t r = 0; r < pooled.size(); ++r) {
    tp += outcome[r] == 1 ? 1 : 0;
    if (n_known > 0 && static_cast<double>(tp) / static_cast<double>(n_known) >= recall_level) {
      cut = r + 1;
      wi.recall_reached = true;
      break;
    }
  }
  for (std::size_t r = 0; r < cut; ++r) {
    if (outcome[r] == 1) {
      ++wi.tp_known;
    } else if (outcome[r] == 2) {
      ++wi.fp_unknown;
    } else {
      ++wi.fp_known;
    }
  }
  wi.prefix = cut;
  wi.value = wi_ratio(wi.tp_known, wi.fp_known, wi.fp_unknown);
  return wi;
}

std::size_t aose_impl(const Aligned& a, Exec exec) {
  std::vector<std::size_t> per_image(a.images.size(), 0);
  parallel_for(a.images.size(), exec, [&](std::size_t img) {
    const auto& list = *a.dets[img];
    const ImageMeta& meta = a.images[img];
    std::vector<std::size_t> known;
    std::vector<double> conf;
    for (std::size_t k = 0; k < list.size(); ++k) {
      if (list[k].decision == Decision::Known) {
        known.push_back(k);
        conf.push_back(list[k].confidence);
      }
    }
    std::vector<PixelBox> d_px, g_px;
    for (std::size_t r : rank_descending(conf)) d_px.push_back(list[known[r]].box.to_pixels(meta));
    for (const auto& g : a.gts(img)) {
      if (!g.is_known()) g_px.push_back(g.box.to_pixels(meta));
    }
    if (d_px.empty() || g_px.empty()) return;
    const auto match = greedy_match(IouMatrix::between(d_px, g_px), 0.5);
    per_image[img] = static_cast<std::size_t>(
        std::count_if(match.begin(), match.end(), [](const auto& m) { return m.has_value(); }));
  });
  return std::accumulate(per_image.begin(), per_image.end(), std::size_t{0});
}

}  // namespace

std::optional<double> average_precision(std::span<const RankedDetection> dets,
                                        const ClassGroundTruth& gts, double iou_threshold,
                                        ApInterpolation interp) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "IoU threshold must be in (0, 1]");
  }
  const std::size_t n_gt = gts.count();
  if (n_gt == 0) return std::nullopt;
  const auto sorted = sort_ranked(dets);
  const double t[] = {iou_threshold};
  const auto tp = match_ranked(sorted, gts, t, Exec::Serial);
  return ap_from_ranked_tp(tp[0], n_gt, interp);
}

double map_known(const Predictions& preds, const AnnotatedDataset& dataset, const EvalOptions& opts) {
  const Aligned a = align(preds, dataset);
  const auto aps = known_class_aps(a, opts);
  if (aps.empty()) fail(ErrorKind::NoKnownGroundTruth, "dataset has no known ground truth");
  double sum = 0.0;
  for (const auto& [c, ap] : aps) sum += mean(ap);
  return sum / static_cast<double>(aps.size());
}

UnknownScores unknown_recall_and_ap(const Predictions& preds, const AnnotatedDataset& dataset,
                                    const EvalOptions& opts) {
  return unknown_scores(align(preds, dataset), opts);
}

WildernessImpact wilderness_impact(const Predictions& preds, const AnnotatedDataset& dataset,
                                   double recall_level, Exec exec) {
  return wi_impl(align(preds, dataset), recall_level, exec);
}

std::size_t aose(const Predictions& preds, const AnnotatedDataset& dataset, Exec exec) {
  return aose_impl(align(preds, dataset), exec);
}

EvalReport evaluate(const Predictions& preds, const AnnotatedDataset& dataset,
                    const EvalOptions& opts) {
  const Aligned a = align(preds, dataset);
  const auto thresholds = coco_iou_thresholds();
  EvalReport r;
  r.images = dataset.images.size();
  r.known_gt = dataset.count_known();
  r.unknown_gt = dataset.count_unknown();
  r.per_iou.resize(thresholds.size());
  for (std::size_t t = 0; t < thresholds.size(); ++t) r.per_iou[t].iou = thresholds[t];

  const auto aps = known_class_aps(a, opts);
  if (aps.empty()) {
    r.warnings.push_back("NoKnownGroundTruth: known metrics set to 0");
  } else {
    double sum = 0.0;
    for (const auto& [c, ap] : aps) {
      r.per_class_ap[c] = mean(ap);
      sum += mean(ap);
      for (std::size_t t = 0; t < thresholds.size(); ++t) r.per_iou[t].map_known += ap[t];
    }
    r.map_known = sum / static_cast<double>(aps.size());
    for (auto& b : r.per_iou) b.map_known /= static_cast<double>(aps.size());
  }

  if (r.unknown_gt == 0) {
    r.warnings.push_back("NoUnknownGroundTruth: unknown metrics set to 0");
  } else {
    const UnknownScores u = unknown_scores(a, opts);
    r.recall_unknown = u.recall;
    r.ap_unknown = u.ap;
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      r.per_iou[t].recall_unknown = u.recall_at[t];
      r.per_iou[t].ap_unknown = u.ap_at[t];
    }
  }

  const WildernessImpact wi = wi_impl(a, opts.wi_recall_level, opts.exec);
  r.wilderness_impact = wi.value;
  r.wi_tp_known = wi.tp_known;
  r.wi_fp_known = wi.fp_known;
  r.wi_fp_unknown = wi.fp_unknown;
  r.wi_recall_reached = wi.recall_reached;
  if (!wi.recall_reached) {
    r.warnings.push_back("RecallUnreachable: wilderness impact computed on all known detections");
  }
  r.aose = aose_impl(a, opts.exec);
  return r;
}

// ---------------------------------------------------------------------------

std::string serialize_report(const EvalReport& r) {
  json per_class = json::object();
  for (const auto& [c, ap] : r.per_class_ap) per_class[std::to_string(c)] = ap;
  json per_iou = json::array();
  for (const auto& b : r.per_iou) {
    per_iou.push_back({{"iou", b.iou},
                       {"map_known", b.map_known},
                       {"ap_unknown", b.ap_unknown},
                       {"recall_unknown", b.recall_unknown}});
  }
  json j = {{"format", "openset-eval-report"},
            {"version", 1},
            {"map_known", r.map_known},
            {"ap_unknown", r.ap_unknown},
            {"recall_unknown", r.recall_unknown},
            {"wilderness_impact", r.wilderness_impact},
            {"wilderness_impact_x100", r.wilderness_impact_x100()},
            {"aose", r.aose},
            {"per_class_ap", per_class},
            {"per_iou", per_iou},
            {"wi_detail",
             {{"tp_known", r.wi_tp_known},
              {"fp_known", r.wi_fp_known},
              {"fp_unknown", r.wi_fp_unknown},
              {"recall_reached", r.wi_recall_reached}}},
            {"counts", {{"images", r.images}, {"known_gt", r.known_gt}, {"unknown_gt", r.unknown_gt}}},
            {"warnings", r.warnings}};
  return j.dump(2) + "\n";
}

EvalReport parse_report(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  try {
    if (j.at("format") != "openset-eval-report" || j.at("version") != 1) {
      throw SchemaError("not an evaluation report");
    }
    EvalReport r;
    r.map_known = j.at("map_known").get<double>();
    r.ap_unknown = j.at("ap_unknown").get<double>();
    r.recall_unknown = j.at("recall_unknown").get<double>();
    r.wilderness_impact = j.at("wilderness_impact").get<double>();
    r.aose = j.at("aose").get<std::size_t>();
    for (const auto& [k, v] : j.at("per_class_ap").items()) r.per_class_ap[std::stoi(k)] = v.get<double>();
    for (const auto& b : j.at("per_iou")) {
      r.per_iou.push_back({b.at("iou").get<double>(), b.at("map_known").get<double>(),
                           b.at("ap_unknown").get<double>(), b.at("recall_unknown").get<double>()});
    }
    const json& wi = j.at("wi_detail");
    r.wi_tp_known = wi.at("tp_known").get<std::size_t>();
    r.wi_fp_known = wi.at("fp_known").get<std::size_t>();
    r.wi_fp_unknown = wi.at("fp_unknown").get<std::size_t>();
    r.wi_recall_reached = wi.at("recall_reached").get<bool>();
    const json& counts = j.at("counts");
    r.images = counts.at("images").get<std::size_t>();
    r.known_gt = counts.at("known_gt").get<std::size_t>();
    r.unknown_gt = counts.at("unknown_gt").get<std::size_t>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (double v : {r.map_known, r.ap_unknown, r.recall_unknown}) {
      if (!(v >= 0.0 && v <= 1.0)) throw SchemaError("rate outside [0, 1]");
    }
    if (!(r.wilderness_impact >= 0.0)) throw SchemaError("negative wilderness impact");
    return r;
  } catch (const SchemaError& e) {
    throw SchemaError(source + ": " + e.what());
  } catch (const std::exception& e) {
    throw SchemaError(source + ": " + e.what());
  }
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  write_text_file(path, serialize_report(report));
}

EvalReport load_report(const std::filesystem::path& path) {
  return parse_report(read_text_file(path), path.string());
}

std::string format_report_table(std::span<const std::pair<std::string, EvalReport>> rows) {
  std::size_t width = 5;
  for (const auto& [label, r] : rows) width = std::max(width, label.size());
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s | %6s | %6s | %6s | %8s | %8s | %6s\n",
                static_cast<int>(width), "Model", "mAP", "R_u", "AP_u", "WI", "WI x100", "AOSE");
  os << buf << std::string(width + 60, '-') << '\n';
  for (const auto& [label, r] : rows) {
    std::snprintf(buf, sizeof buf, "%-*s | %6.3f | %6.3f | %6.3f | %8.4f | %8.2f | %6zu\n",
                  static_cast<int>(width), label.c_str(), r.map_known, r.recall_unknown,
                  r.ap_unknown, r.wilderness_impact, r.wilderness_impact_x100(), r.aose);
    os << buf;
  }
  return os.str();
}

}  // namespace openset
