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
#include "openset/error.hpp"
#include "openset/objectness_model.hpp"
#include "openset/random_forest.hpp"
#include "support/data.hpp"

using namespace openset;

namespace {

ForestConfig small(int trees = 10) {
  ForestConfig c;
  c.n_trees = trees;
  return c;
}

}  // namespace

TEST_CASE("single-class data gives a constant prior model") {
  data::Labeled d = data::separable_1d(100, 1);
  std::fill(d.y.begin(), d.y.end(), 1);
  const auto m = train_random_forest(d.X, d.y, small(), 3);
  CHECK(m.degenerate);
  CHECK(m.prior == 1.0);
  for (const auto& r : d.X.rows) CHECK(m.predict(r) == 1.0);
  std::fill(d.y.begin(), d.y.end(), 0);
  const auto z = train_random_forest(d.X, d.y, small(), 3);
  CHECK(z.degenerate);
  CHECK(z.predict(d.X.rows[0]) == 0.0);
}

TEST_CASE("separable data is learned") {
  const data::Labeled d = data::separable_1d(2000, 2);
  const auto m = train_random_forest(d.X, d.y, ForestConfig{}, 7);
  CHECK(m.trees.size() == 100);
  const auto p = m.predict(d.X.rows);
  CHECK(data::accuracy(p, d.y) >= 0.99);
  for (std::size_t i = 0; i < 50; ++i) CHECK((p[i] > 0.5) == (d.y[i] == 1));
}

TEST_CASE("forest training is deterministic and worker independent") {
  const data::Labeled d = data::noisy(600, 3);
  const auto a = train_random_forest(d.X, d.y, small(16), 11, Exec::Serial);
  const auto b = train_random_forest(d.X, d.y, small(16), 11, Exec::Parallel);
  set_worker_count(3);
  const auto c = train_random_forest(d.X, d.y, small(16), 11, Exec::Parallel);
  set_worker_count(1);
  CHECK(a == b);
  CHECK(a == c);
  CHECK(serialize_model(a) == serialize_model(b));
  const auto other = train_random_forest(d.X, d.y, small(16), 12);
  CHECK_FALSE(other == a);
  CHECK(a.predict(d.X.rows, Exec::Serial) == a.predict(d.X.rows, Exec::Parallel));
}

TEST_CASE("hand-built stump") {
  RandomForestModel m;
  m.config.n_trees = 1;
  DecisionTree t;
  t.nodes = {{0, 0.0, 1, 2, 0.5}, {-1, 0, -1, -1, 0.2}, {-1, 0, -1, -1, 0.8}};
  m.trees = {t};
  CHECK(m.predict(FeatureRow{-1, 0, 0, 0, 0}) == 0.2);
  CHECK(m.predict(FeatureRow{1, 0, 0, 0, 0}) == 0.8);
  CHECK(m.predict(FeatureRow{0, 5, 5, 5, 5}) == 0.2);  // threshold goes left
  CHECK(t.depth() == 1);
}

TEST_CASE("tree structure respects the configuration") {
  const data::Labeled d = data::noisy(1500, 4);
  ForestConfig cfg = small(8);
  cfg.max_depth = 4;
  const auto m = train_random_forest(d.X, d.y, cfg, 5);
  for (const auto& t : m.trees) {
    CHECK(t.depth() <= 4);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
      const auto& n = t.nodes[i];
      CHECK((n.value >= 0 && n.value <= 1));
      if (!n.is_leaf()) {
        CHECK(n.left > static_cast<int>(i));
        CHECK(n.right > static_cast<int>(i));
      }
    }
  }
  for (double p : m.predict(d.X.rows)) CHECK((p >= 0 && p <= 1));
}

TEST_CASE("masked features are never split on") {
  data::Labeled d = data::separable_1d(500, 5);
  d.X.mask = FeatureMask::parse("f_nan,s_box");
  for (auto& r : d.X.rows) r = d.X.mask.apply(r);
  const auto m = train_random_forest(d.X, d.y, small(), 6);
  CHECK(m.mask == d.X.mask);
  for (const auto& t : m.trees) {
    for (const auto& n : t.nodes) CHECK((n.is_leaf() || (n.feature != 0 && n.feature != 2)));
  }
}

TEST_CASE("forest predictions survive monotone feature transforms") {
  const data::Labeled d = data::noisy(800, 6);
  data::Labeled t = d;
  for (auto& r : t.X.rows) {
    r[0] = std::exp(3 * r[0]);
    r[1] = r[1] * r[1] * r[1] + 2 * r[1];
    r[2] = 10 * r[2] - 4;
    r[3] = std::atan(r[3]);
    r[4] = r[4] + 100;
  }
  const auto a = train_random_forest(d.X, d.y, small(12), 9);
  const auto b = train_random_forest(t.X, t.y, small(12), 9);
  CHECK(a.predict(d.X.rows) == b.predict(t.X.rows));
}

TEST_CASE("positive weight raises object scores") {
  const data::Labeled d = data::noisy(800, 7);
  ForestConfig w = small();
  w.positive_weight = 5.0;
  const auto plain = train_random_forest(d.X, d.y, small(), 1);
  const auto heavy = train_random_forest(d.X, d.y, w, 1);
  double sp = 0, sh = 0;
  for (const auto& r : d.X.rows) {
    sp += plain.predict(r);
    sh += heavy.predict(r);
  }
  CHECK(sh > sp);
}

TEST_CASE("forest input errors") {
  const data::Labeled d = data::separable_1d(5, 8);
  CHECK_THROWS_AS(train_random_forest(d.X, d.y, small(), 1), Error);  // n < min_samples_split
  data::Labeled e = data::separable_1d(50, 8);
  e.y[3] = 2;
  CHECK_THROWS_AS(train_random_forest(e.X, e.y, small(), 1), Error);
  e.y.pop_back();
  CHECK_THROWS_AS(train_random_forest(e.X, e.y, small(), 1), Error);
}
