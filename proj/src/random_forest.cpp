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

#include "openset/random_forest.hpp"

#include <algorithm>
#include <numeric>

#include "openset/error.hpp"
#include "openset/rng.hpp"

namespace openset {

double DecisionTree::predict(const FeatureRow& x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[n.feature] <= n.threshold ? n.left : n.right);
  }
  return nodes[i].value;
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return deepest;
}

double RandomForestModel::predict(const FeatureRow& x) const {
  if (degenerate || trees.empty()) return prior;
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

std::vector<double> RandomForestModel::predict(std::span<const FeatureRow> rows, Exec exec) const {
  std::vector<double> out(rows.size());
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict(rows[i]);
    return out;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = predict(rows[i]);
  return out;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0;
  double impurity = 0;  // weighted child impurity
};

// Weighted Gini impurity times total weight: 2 * w0 * w1 / (w0 + w1).
double scaled_gini(double w0, double w1) {
  const double w = w0 + w1;
  return w > 0.0 ? 2.0 * w0 * w1 / w : 0.0;
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& X, std::span<const int> y, const ForestConfig& cfg,
              std::vector<std::uint32_t> sample)
      : X_(X), y_(y), cfg_(cfg), sample_(std::move(sample)), goes_left_(sample_.size()) {
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      if (X.mask.dropped(f)) continue;
      features_.push_back(static_cast<int>(f));
      std::vector<std::uint32_t> order(sample_.size());
      std::iota(order.begin(), order.end(), 0u);
      std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return value(a, f) < value(b, f);
      });
      sorted_.push_back(std::move(order));
    }
  }

  DecisionTree build() {
    grow(0, sample_.size(), 0);
    return std::move(tree_);
  }

 private:
  double value(std::uint32_t pos, std::size_t f) const { return X_.rows[sample_[pos]][f]; }
  int label(std::uint32_t pos) const { return y_[sample_[pos]]; }
  double weight(std::uint32_t pos) const { return label(pos) ? cfg_.positive_weight : 1.0; }

  int grow(std::size_t begin, std::size_t end, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    // Sums over any one feature list cover the node's sample set.
    double w0 = 0.0, w1 = 0.0;
    const auto& any = sorted_.empty() ? fallback_order(begin, end) : sorted_.front();
    for (std::size_t k = begin; k < end; ++k) {
      if (label(any[k])) {
        w1 += weight(any[k]);
      } else {
        w0 += weight(any[k]);
      }
    }
    tree_.nodes[index].value = (w0 + w1) > 0.0 ? w1 / (w0 + w1) : 0.0;

    const std::size_t n = end - begin;
    const double parent = scaled_gini(w0, w1);
    if (depth >= cfg_.max_depth || n < static_cast<std::size_t>(cfg_.min_samples_split) ||
        n < 2 * static_cast<std::size_t>(cfg_.min_samples_leaf) || parent <= 0.0 ||
        sorted_.empty()) {
      return index;
    }

    const Split best = find_split(begin, end, w0, w1);
    // Require a real impurity decrease, not rounding noise.
    if (best.feature < 0 || !(best.impurity < parent - 1e-12 * (w0 + w1))) return index;

    const std::size_t mid = partition(begin, end, best);
    tree_.nodes[index].feature = best.feature;
    tree_.nodes[index].threshold = best.threshold;
    const int left = grow(begin, mid, depth + 1);
    const int right = grow(mid, end, depth + 1);
    tree_.nodes[index].left = left;
    tree_.nodes[index].right = right;
    return index;
  }

  Split find_split(std::size_t begin, std::size_t end, double w0, double w1) const {
    Split best;
    const std::size_t min_leaf = static_cast<std::size_t>(cfg_.min_samples_leaf);
    const std::size_t n = end - begin;
    for (std::size_t fi = 0; fi < features_.size(); ++fi) {
      const auto& order = sorted_[fi];
      const auto f = static_cast<std::size_t>(features_[fi]);
      double l0 = 0.0, l1 = 0.0;
      for (std::size_t k = begin; k + 1 < end; ++k) {
        const std::uint32_t pos = order[k];
        if (label(pos)) {
          l1 += weight(pos);
        } else {
          l0 += weight(pos);
        }
        const std::size_t n_left = k + 1 - begin;
        const double v = value(pos, f);
        const double next = value(order[k + 1], f);
        if (!(v < next)) continue;
        if (n_left < min_leaf || n - n_left < min_leaf) continue;
        const double impurity = scaled_gini(l0, l1) + scaled_gini(w0 - l0, w1 - l1);
        if (best.feature < 0 || impurity < best.impurity) {
          double threshold = 0.5 * (v + next);
          if (!(threshold < next)) threshold = v;
          best = {static_cast<int>(f), threshold, impurity};
        }
      }
    }
    return best;
  }

  // Stable partition of every feature list's [begin, end) segment.
  std::size_t partition(std::size_t begin, std::size_t end, const Split& split) {
    const auto f = static_cast<std::size_t>(split.feature);
    std::size_t n_left = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const std::uint32_t pos = sorted_.front()[k];
      goes_left_[pos] = value(pos, f) <= split.threshold;
      n_left += goes_left_[pos];
    }
    scratch_.resize(end - begin);
    for (auto& order : sorted_) {
      std::size_t l = 0, r = n_left;
      for (std::size_t k = begin; k < end; ++k) {
        const std::uint32_t pos = order[k];
        scratch_[goes_left_[pos] ? l++ : r++] = pos;
      }
      std::copy(scratch_.begin(), scratch_.end(), order.begin() + static_cast<std::ptrdiff_t>(begin));
    }
    return begin + n_left;
  }

  const std::vector<std::uint32_t>& fallback_order(std::size_t begin, std::size_t end) {
    if (fallback_.empty()) {
      fallback_.resize(sample_.size());
      std::iota(fallback_.begin(), fallback_.end(), 0u);
    }
    (void)begin;
    (void)end;
    return fallback_;
  }

  const FeatureMatrix& X_;
  std::span<const int> y_;
  const ForestConfig& cfg_;
  std::vector<std::uint32_t> sample_;
  std::vector<int> features_;
  std::vector<std::vector<std::uint32_t>> sorted_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::uint32_t> fallback_;
  DecisionTree tree_;
};

void check_config(const ForestConfig& cfg) {
  if (cfg.n_trees < 1 || cfg.max_depth < 0 || cfg.min_samples_split < 2 ||
      cfg.min_samples_leaf < 1 || !(cfg.positive_weight > 0.0)) {
    fail(ErrorKind::InvalidArgument, "invalid random forest configuration");
  }
}

}  // namespace

RandomForestModel train_random_forest(const FeatureMatrix& X, std::span<const int> y,
                                      const ForestConfig& config, std::uint64_t seed, Exec exec) {
  check_config(config);
  if (X.size() != y.size()) fail(ErrorKind::LengthMismatch, "feature rows and labels differ in length");
  if (X.size() < static_cast<std::size_t>(config.min_samples_split)) {
    fail(ErrorKind::InvalidArgument, "training set smaller than min_samples_split");
  }
  RandomForestModel model;
  model.config = config;
  model.seed = seed;
  model.mask = X.mask;

  double w0 = 0.0, w1 = 0.0;
  for (int label : y) {
    if (label != 0 && label != 1) fail(ErrorKind::InvalidArgument, "labels must be 0 or 1");
    if (label) {
      w1 += config.positive_weight;
    } else {
      w0 += 1.0;
    }
  }
  model.prior = w1 / (w0 + w1);
  if (w0 == 0.0 || w1 == 0.0) {
    model.degenerate = true;
    return model;
  }

  const std::size_t n = X.size();
  model.trees.resize(static_cast<std::size_t>(config.n_trees));
  parallel_for(model.trees.size(), exec, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::uint32_t> sample(n);
    for (auto& s : sample) s = static_cast<std::uint32_t>(rng.index(n));
    model.trees[t] = TreeBuilder(X, y, config, std::move(sample)).build();
  });
  return model;
}

}  // namespace openset
