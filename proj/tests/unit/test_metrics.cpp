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
#include <string>

#include "doctest.h"
#include "openset/error.hpp"
#include "openset/metrics.hpp"
#include "support/scenes.hpp"

using namespace openset;

namespace {

const ImageMeta kMeta{"a", 100, 100};
const Box kGt{0.5, 0.5, 0.2, 0.2};

Detection known(const Box& b, double conf, int cls = 1) {
  return {b, Decision::Known, cls, conf, conf};
}

Detection unknown(const Box& b, double conf) { return {b, Decision::Unknown, 0, conf, conf}; }

AnnotatedDataset one_image(std::vector<GroundTruth> gts, int n_classes = 1) {
  AnnotatedDataset d;
  for (int c = 1; c <= n_classes; ++c) d.known.categories.push_back({c, "c" + std::to_string(c)});
  d.images.push_back(kMeta);
  d.ground_truths[kMeta.image_id] = std::move(gts);
  return d;
}

// Horizontal shift of 4.5 px on a 20 px box: IoU 15.5 / 24.5 = 0.633.
const Box kShifted{0.545, 0.5, 0.2, 0.2};

}  // namespace

TEST_CASE("hand AP examples") {
  const std::vector<ImageMeta> images{kMeta};
  ClassGroundTruth one{images, {{kGt}}};
  const Box close{0.505, 0.5, 0.2, 0.2};  // IoU 0.905
  const Box far{0.1, 0.1, 0.1, 0.1};
  CHECK(*average_precision(std::vector<RankedDetection>{{0, close, 0.9}}, one, 0.5) == 1.0);
  CHECK(*average_precision(std::vector<RankedDetection>{{0, close, 0.9}, {0, far, 0.5}}, one, 0.5) == 1.0);

  const Box second{0.2, 0.2, 0.2, 0.2};
  ClassGroundTruth two{images, {{kGt, second}}};
  const double ap = *average_precision(
      std::vector<RankedDetection>{{0, kGt, 0.9}, {0, far, 0.8}, {0, second, 0.7}}, two, 0.5);
  CHECK(std::abs(ap - (51.0 + 50.0 * 2.0 / 3.0) / 101.0) < 1e-9);
  CHECK(std::abs(ap - 0.8350) < 1e-4);
  CHECK(std::abs(ap_from_ranked_tp(std::vector<char>{1, 0, 1}, 2) - ap) < 1e-15);

  ClassGroundTruth none{images, {{}}};
  CHECK_FALSE(average_precision(std::vector<RankedDetection>{{0, kGt, 0.9}}, none, 0.5).has_value());
  CHECK_THROWS_AS(average_precision(std::vector<RankedDetection>{}, one, 0.0), Error);
}

TEST_CASE("ground truth as predictions scores perfectly") {
  gen::Gen g(71);
  for (int t = 0; t < 50; ++t) {
    scenes::Scene s = scenes::random_scene(g, 3, 4, true);
    if (s.dataset.count_known() == 0) continue;
    Predictions preds;
    for (const auto& meta : s.dataset.images) {
      auto& list = preds[meta.image_id];
      for (const auto& gt : s.dataset.gts(meta.image_id)) {
        list.push_back(gt.is_known() ? known(gt.box, 1.0, *gt.known_class) : unknown(gt.box, 1.0));
      }
    }
    CHECK(map_known(preds, s.dataset) == 1.0);
    CHECK(wilderness_impact(preds, s.dataset).value == 0.0);
    if (s.dataset.count_unknown() > 0) CHECK(unknown_recall_and_ap(preds, s.dataset).recall == 1.0);
  }
}

TEST_CASE("no predictions score zero") {
  const AnnotatedDataset d = one_image({{kGt, 1}, {Box{0.2, 0.2, 0.1, 0.1}, std::nullopt}});
  CHECK(map_known({}, d) == 0.0);
  const UnknownScores u = unknown_recall_and_ap({}, d);
  CHECK(u.recall == 0.0);
  CHECK(u.ap == 0.0);
  const Predictions only_known{{"a", {known(kGt, 0.9)}}};
  CHECK(unknown_recall_and_ap(only_known, d).recall == 0.0);
}

TEST_CASE("unknown recall across the IoU sweep") {
  const AnnotatedDataset d = one_image({{kGt, std::nullopt}});
  const Predictions p{{"a", {unknown(kShifted, 0.7)}}};
  const UnknownScores u = unknown_recall_and_ap(p, d);
  CHECK(std::abs(u.recall - 0.3) < 1e-15);
  CHECK(u.recall_at[2] == 1.0);
  CHECK(u.recall_at[3] == 0.0);
  CHECK(std::abs(u.ap - 0.3) < 1e-15);
}

TEST_CASE("known and unknown ground truth do not mix") {
  const AnnotatedDataset d = one_image({{kGt, 1}, {Box{0.2, 0.2, 0.2, 0.2}, std::nullopt}});
  // An unknown-labeled detection on the known object is not a known hit.
  const Predictions p{{"a", {unknown(kGt, 0.9), known(Box{0.2, 0.2, 0.2, 0.2}, 0.8)}}};
  CHECK(map_known(p, d) == 0.0);
  CHECK(unknown_recall_and_ap(p, d).recall == 0.0);
  CHECK(aose(p, d) == 1);
}

TEST_CASE("missing images and empty classes") {
  const AnnotatedDataset d = one_image({{kGt, 1}});
  const Predictions stray{{"b", {known(kGt, 0.9)}}};
  for (auto f : {+[](const Predictions& p, const AnnotatedDataset& a) { (void)map_known(p, a); },
                 +[](const Predictions& p, const AnnotatedDataset& a) { (void)evaluate(p, a); },
                 +[](const Predictions& p, const AnnotatedDataset& a) { (void)aose(p, a); }}) {
    try {
      f(stray, d);
      FAIL("expected MissingImage");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MissingImage);
    }
  }
  try {
    (void)map_known({}, one_image({{kGt, std::nullopt}}));
    FAIL("expected NoKnownGroundTruth");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoKnownGroundTruth);
  }
  try {
    (void)unknown_recall_and_ap({}, d);
    FAIL("expected NoUnknownGroundTruth");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoUnknownGroundTruth);
  }
  const EvalReport r = evaluate({}, d);
  CHECK(r.recall_unknown == 0.0);
  CHECK(r.warnings.size() == 2);  // no unknown GT, recall never reached
}

TEST_CASE("wilderness impact hand example") {
  CHECK(wi_ratio(8, 2, 1) == 0.1);
  CHECK(wi_ratio(0, 0, 0) == 0.0);

  // Ten known objects, eight hit, two background misses, one unknown hit.
  AnnotatedDataset d;
  d.known.categories.push_back({1, "c1"});
  Predictions p;
  for (int i = 0; i < 10; ++i) {
    const ImageMeta meta{"im" + std::to_string(i), 100, 100};
    d.images.push_back(meta);
    d.ground_truths[meta.image_id] = {{kGt, 1}};
    if (i == 0) d.ground_truths[meta.image_id].push_back({Box{0.15, 0.15, 0.2, 0.2}, std::nullopt});
    auto& list = p[meta.image_id];
    if (i < 8) list.push_back(known(kGt, 0.9 - 0.01 * i));
    if (i == 0) list.push_back(known(Box{0.15, 0.15, 0.2, 0.2}, 0.85));
    if (i == 1 || i == 2) list.push_back(known(Box{0.85, 0.85, 0.1, 0.1}, 0.86));
    if (i == 9) list.push_back(known(kGt, 0.01));  // beyond the 0.8 recall prefix
  }
  const WildernessImpact wi = wilderness_impact(p, d, 0.8);
  CHECK(wi.tp_known == 8);
  CHECK(wi.fp_known == 2);
  CHECK(wi.fp_unknown == 1);
  CHECK(wi.prefix == 11);
  CHECK(wi.recall_reached);
  CHECK(wi.value == 0.1);
  CHECK(evaluate(p, d).wilderness_impact_x100() == doctest::Approx(10.0));
  CHECK_THROWS_AS(wilderness_impact(p, d, 0.0), Error);
}

TEST_CASE("wilderness impact without unknown objects is zero") {
  gen::Gen g(72);
  for (int t = 0; t < 200; ++t) {
    const scenes::Scene s = scenes::random_scene(g, 2, 3, false);
    CHECK(wilderness_impact(s.preds, s.dataset).value == 0.0);
    CHECK(aose(s.preds, s.dataset) == 0);
  }
}

TEST_CASE("AOSE examples") {
  const AnnotatedDataset d = one_image({{kGt, std::nullopt}});
  CHECK(aose(Predictions{{"a", {known(kShifted, 0.8)}}}, d) == 1);
  CHECK(aose(Predictions{{"a", {unknown(kShifted, 0.8), unknown(kGt, 0.9)}}}, d) == 0);
  const AnnotatedDataset three =
      one_image({{kGt, std::nullopt}, {Box{0.15, 0.15, 0.2, 0.2}, std::nullopt}, {Box{0.85, 0.85, 0.2, 0.2}, std::nullopt}});
  std::vector<Detection> five;
  for (int i = 0; i < 5; ++i) five.push_back(known(Box{0.5 + 0.002 * i, 0.5, 0.2, 0.2}, 0.5 + 0.1 * i));
  CHECK(aose(Predictions{{"a", five}}, three) == 1);
}

TEST_CASE("metrics agree with brute force on random micro-scenes") {
  gen::Gen g(73);
  int compared_map = 0, compared_unknown = 0;
  for (int t = 0; t < 300; ++t) {
    const scenes::Scene s = scenes::random_scene(g, g.integer(1, 3), 3, true);
    if (s.dataset.count_known() > 0) {
      CHECK(std::abs(map_known(s.preds, s.dataset) - scenes::brute_map(s)) < 1e-12);
      EvalOptions all_point;
      all_point.interpolation = ApInterpolation::AllPoint;
      CHECK(std::abs(map_known(s.preds, s.dataset, all_point) - scenes::brute_map(s, true)) < 1e-12);
      compared_map++;
    }
    if (s.dataset.count_unknown() > 0) {
      const UnknownScores u = unknown_recall_and_ap(s.preds, s.dataset);
      const scenes::BruteUnknown b = scenes::brute_unknown(s);
      CHECK(std::abs(u.recall - b.recall) < 1e-12);
      CHECK(std::abs(u.ap - b.ap) < 1e-12);
      compared_unknown++;
    }
    const WildernessImpact wi = wilderness_impact(s.preds, s.dataset);
    const scenes::BruteWi bw = scenes::brute_wi(s);
    CHECK(wi.tp_known == bw.tp);
    CHECK(wi.fp_known == bw.fp_known);
    CHECK(wi.fp_unknown == bw.fp_unknown);
    CHECK(wi.recall_reached == bw.reached);
    CHECK(wi.value == bw.value);
    const std::size_t a = aose(s.preds, s.dataset);
    CHECK(a == scenes::brute_aose(s));
    CHECK(a <= s.dataset.count_unknown());
    CHECK(evaluate(s.preds, s.dataset, {ApInterpolation::Coco101, 0.8, Exec::Serial}) == evaluate(s.preds, s.dataset));
  }
  CHECK(compared_map >= 200);
  CHECK(compared_unknown >= 200);
}

TEST_CASE("AP depends only on confidence ranks") {
  gen::Gen g(74);
  for (int t = 0; t < 100; ++t) {
    const scenes::Scene s = scenes::random_scene(g, 2, 3, true);
    if (s.dataset.count_known() == 0 || s.dataset.count_unknown() == 0) continue;
    scenes::Scene warped = s;
    for (auto& [id, list] : warped.preds) {
      for (auto& d : list) d.confidence = 0.1 + 0.5 * d.confidence * d.confidence * d.confidence;
    }
    CHECK(map_known(warped.preds, warped.dataset) == map_known(s.preds, s.dataset));
    CHECK(unknown_recall_and_ap(warped.preds, warped.dataset).ap == unknown_recall_and_ap(s.preds, s.dataset).ap);
    CHECK(wilderness_impact(warped.preds, warped.dataset).value == wilderness_impact(s.preds, s.dataset).value);
  }
}

TEST_CASE("reports round-trip and tabulate") {
  gen::Gen g(75);
  scenes::Scene s;
  do {
    s = scenes::random_scene(g, 2, 3, true);
  } while (s.dataset.count_known() == 0 || s.dataset.count_unknown() == 0);
  const EvalReport r = evaluate(s.preds, s.dataset);
  CHECK(r.per_iou.size() == 10);
  CHECK(r.images == s.dataset.images.size());
  const EvalReport back = parse_report(serialize_report(r));
  CHECK(back == r);
  CHECK(serialize_report(back) == serialize_report(r));
  CHECK_THROWS_AS(parse_report("{\"format\":\"x\"}"), SchemaError);
  CHECK_THROWS_AS(parse_report("nope"), ParseError);

  const std::vector<std::pair<std::string, EvalReport>> rows{{"full", r}, {"w/o NAN", r}};
  const std::string table = format_report_table(rows);
  CHECK(table.find("Model") != std::string::npos);
  CHECK(table.find("WI x100") != std::string::npos);
  CHECK(table.find("w/o NAN") != std::string::npos);
}
