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

#include <filesystem>
#include <functional>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "openset/error.hpp"
#include "openset/objectness_model.hpp"
#include "support/data.hpp"

using namespace openset;
using nlohmann::json;

namespace {

ObjectnessModel forest() {
  const data::Labeled d = data::noisy(300, 1);
  ForestConfig c;
  c.n_trees = 4;
  return train_random_forest(d.X, d.y, c, 2);
}

ObjectnessModel mlp() {
  const data::Labeled d = data::noisy(300, 1);
  MlpConfig c;
  c.epochs = 2;
  return train_mlp(d.X, d.y, c, 2);
}

ErrorKind error_kind_of(const std::string& text) {
  try {
    (void)parse_model(text);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("model parsed");
  return ErrorKind::Parse;
}

std::string edit(const ObjectnessModel& m, const std::function<void(json&)>& f) {
  json j = json::parse(serialize_model(m));
  f(j);
  return j.dump();
}

}  // namespace

TEST_CASE("models round-trip exactly") {
  for (const ObjectnessModel& m : {forest(), mlp()}) {
    const std::string text = serialize_model(m);
    const ObjectnessModel back = parse_model(text);
    CHECK(back == m);
    CHECK(serialize_model(back) == text);
  }
  const auto path = std::filesystem::temp_directory_path() / "openset_model_test.json";
  save_model(forest(), path);
  CHECK(load_model(path) == forest());
  std::filesystem::remove(path);
}

TEST_CASE("model files are self-describing") {
  const json j = json::parse(serialize_model(forest()));
  CHECK(j["format"] == "openset-objectness-model");
  CHECK(j["version"] == 1);
  CHECK(j["kind"] == "random_forest");
  CHECK(j["feature_order"] == json({"f_nan", "p_conf", "s_box", "d_center", "d_edge"}));
  const json k = json::parse(serialize_model(mlp()));
  CHECK(k["kind"] == "mlp");
  CHECK(k["config"]["adam"]["beta2"] == 0.999);
  CHECK(k["config"]["hidden"] == json({96, 48, 24}));
}

TEST_CASE("corrupted model fields are schema errors") {
  const ObjectnessModel f = forest();
  auto first_leaf = [](json& j) -> json& {
    for (auto& n : j["trees"][0]["nodes"]) {
      if (n.contains("leaf")) return n;
    }
    throw std::runtime_error("no leaf");
  };
  CHECK(error_kind_of(edit(f, [&](json& j) { first_leaf(j)["leaf"] = 1.5; })) == ErrorKind::Schema);
  CHECK(error_kind_of(edit(f, [&](json& j) { j["trees"][0]["nodes"][0]["feature"] = 7; })) == ErrorKind::Schema);
  CHECK(error_kind_of(edit(f, [&](json& j) { j["trees"][0]["nodes"][0]["left"] = 0; })) == ErrorKind::Schema);
  CHECK(error_kind_of(edit(f, [&](json& j) { j["trees"].erase(0); })) == ErrorKind::Schema);
  CHECK(error_kind_of(edit(f, [&](json& j) { j.erase("kind"); })) == ErrorKind::Schema);
  CHECK(error_kind_of(edit(f, [&](json& j) { j["version"] = 2; })) == ErrorKind::Schema);
  CHECK(error_kind_of(edit(f, [&](json& j) { j["format"] = "something"; })) == ErrorKind::Schema);
  CHECK(error_kind_of(edit(f, [&](json& j) { j["config"]["max_depth"] = 0; })) == ErrorKind::Schema);
  CHECK(error_kind_of(edit(f, [&](json& j) { j["feature_order"][0] = "p_conf"; })) == ErrorKind::FeatureMismatch);
  CHECK(error_kind_of(edit(f, [&](json& j) { j["dropped_features"] = json({"f_nan"}); j["trees"][0]["nodes"][0]["feature"] = 0; })) ==
        ErrorKind::Schema);

  const ObjectnessModel m = mlp();
  CHECK(error_kind_of(edit(m, [&](json& j) { j["layers"][1]["weights"].erase(0); })) == ErrorKind::Schema);
  CHECK(error_kind_of(edit(m, [&](json& j) { j["layers"][2]["in"] = 47; })) == ErrorKind::Schema);
  CHECK(error_kind_of(edit(m, [&](json& j) { j["layers"][0]["bias"][0] = "x"; })) == ErrorKind::Schema);
  CHECK(error_kind_of("{ not json") == ErrorKind::Parse);
}

TEST_CASE("objectness prediction checks the feature mask") {
  const ObjectnessModel f = forest();
  FeatureMatrix X;
  X.rows = {{1, 0.5, 0.1, 0.2, 0.1}, {-1, 0.1, 0.3, 0.4, 0.0}};
  const auto p = predict_objectness(f, X);
  CHECK(p.size() == 2);
  for (double v : p) CHECK((v >= 0 && v <= 1));
  X.mask = FeatureMask::parse("f_nan");
  try {
    (void)predict_objectness(f, X);
    FAIL("expected FeatureMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FeatureMismatch);
  }
}

TEST_CASE("estimator names") {
  CHECK(parse_estimator_kind("rf") == EstimatorKind::RandomForest);
  CHECK(parse_estimator_kind("random_forest") == EstimatorKind::RandomForest);
  CHECK(parse_estimator_kind("mlp") == EstimatorKind::Mlp);
  CHECK_THROWS_AS(parse_estimator_kind("svm"), Error);
  CHECK(kind_of(mlp()) == EstimatorKind::Mlp);
}
