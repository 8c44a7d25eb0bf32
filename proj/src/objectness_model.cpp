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

#include "openset/objectness_model.hpp"

#include <cmath>

#include "json.hpp"
#include "openset/error.hpp"
#include "openset/ingest.hpp"

namespace openset {

using nlohmann::json;

namespace {

constexpr std::string_view kModelFormat = "openset-objectness-model";
constexpr int kModelVersion = 1;

json feature_order() {
  json arr = json::array();
  for (auto name : kFeatureNames) arr.push_back(name);
  return arr;
}

json to_json(const FeatureMask& mask) { return mask.dropped_names(); }

FeatureMask mask_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("dropped_features must be an array");
  std::string names;
  for (const auto& v : j) {
    if (!v.is_string()) throw SchemaError("dropped_features entries must be strings");
    names += v.get<std::string>() + ",";
  }
  try {
    return FeatureMask::parse(names);
  } catch (const Error& e) {
    throw SchemaError(e.what());
  }
}

double get_finite(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) throw SchemaError(std::string("missing number '") + key + "'");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw SchemaError(std::string("non-finite '") + key + "'");
  return v;
}

long long get_int(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    throw SchemaError(std::string("missing integer '") + key + "'");
  }
  return it->get<long long>();
}

const json& get(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field '") + key + "'");
  return *it;
}

json forest_json(const RandomForestModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"leaf", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  return {{"kind", "random_forest"},
          {"config",
           {{"n_trees", m.config.n_trees},
            {"max_depth", m.config.max_depth},
            {"min_samples_split", m.config.min_samples_split},
            {"min_samples_leaf", m.config.min_samples_leaf},
            {"positive_weight", m.config.positive_weight}}},
          {"seed", m.seed},
          {"degenerate", m.degenerate},
          {"prior", m.prior},
          {"trees", std::move(trees)}};
}

RandomForestModel forest_from_json(const json& j, const FeatureMask& mask) {
  RandomForestModel m;
  m.mask = mask;
  const json& c = get(j, "config");
  m.config.n_trees = static_cast<int>(get_int(c, "n_trees"));
  m.config.max_depth = static_cast<int>(get_int(c, "max_depth"));
  m.config.min_samples_split = static_cast<int>(get_int(c, "min_samples_split"));
  m.config.min_samples_leaf = static_cast<int>(get_int(c, "min_samples_leaf"));
  m.config.positive_weight = get_finite(c, "positive_weight");
  m.seed = get(j, "seed").get<std::uint64_t>();
  m.degenerate = get(j, "degenerate").get<bool>();
  m.prior = get_finite(j, "prior");
  if (m.prior < 0.0 || m.prior > 1.0) throw SchemaError("prior outside [0, 1]");

  const json& trees = get(j, "trees");
  if (!trees.is_array()) throw SchemaError("trees must be an array");
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const std::string where = "tree " + std::to_string(t);
    const json& nodes = get(trees[t], "nodes");
    if (!nodes.is_array() || nodes.empty()) throw SchemaError(where + ": nodes must be a non-empty array");
    DecisionTree tree;
    const auto count = static_cast<long long>(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const json& n = nodes[k];
      TreeNode node;
      if (n.contains("leaf")) {
        node.value = get_finite(n, "leaf");
      } else {
        const long long f = get_int(n, "feature");
        if (f < 0 || f >= static_cast<long long>(kNumFeatures)) throw SchemaError(where + ": bad feature index");
        if (mask.dropped(static_cast<std::size_t>(f))) throw SchemaError(where + ": split on a dropped feature");
        node.feature = static_cast<int>(f);
        node.threshold = get_finite(n, "threshold");
        const long long l = get_int(n, "left"), r = get_int(n, "right");
        // Children always follow their parent, which also rules out cycles.
        if (l <= static_cast<long long>(k) || l >= count || r <= static_cast<long long>(k) || r >= count) {
          throw SchemaError(where + ": child index out of range");
        }
        node.left = static_cast<int>(l);
        node.right = static_cast<int>(r);
        node.value = get_finite(n, "value");
      }
      if (node.value < 0.0 || node.value > 1.0) throw SchemaError(where + ": probability outside [0, 1]");
      tree.nodes.push_back(node);
    }
    if (tree.depth() > m.config.max_depth) throw SchemaError(where + ": deeper than max_depth");
    m.trees.push_back(std::move(tree));
  }
  if (!m.degenerate && m.trees.size() != static_cast<std::size_t>(m.config.n_trees)) {
    throw SchemaError("tree count does not match n_trees");
  }
  return m;
}

json mlp_json(const MlpModel& m) {
  json layers = json::array();
  for (const auto& L : m.layers) {
    layers.push_back({{"in", L.in}, {"out", L.out}, {"weights", L.weights}, {"bias", L.bias}});
  }
  const MlpConfig& c = m.config;
  return {{"kind", "mlp"},
          {"config",
           {{"hidden", c.hidden},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"early_stop", c.early_stop},
            {"validation_fraction", c.validation_fraction},
            {"patience", c.patience},
            {"positive_weight", c.positive_weight},
            {"activation", "relu"},
            {"output", "logistic"},
            {"adam", {{"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.adam_eps}}}}},
          {"seed", m.seed},
          {"trained_epochs", m.trained_epochs},
          {"loss_history", m.loss_history},
          {"layers", std::move(layers)}};
}

MlpModel mlp_from_json(const json& j, const FeatureMask& mask) {
  MlpModel m;
  m.mask = mask;
  const json& c = get(j, "config");
  m.config.hidden = get(c, "hidden").get<std::vector<int>>();
  m.config.learning_rate = get_finite(c, "learning_rate");
  m.config.batch_size = static_cast<int>(get_int(c, "batch_size"));
  m.config.epochs = static_cast<int>(get_int(c, "epochs"));
  m.config.early_stop = get(c, "early_stop").get<bool>();
  m.config.validation_fraction = get_finite(c, "validation_fraction");
  m.config.patience = static_cast<int>(get_int(c, "patience"));
  m.config.positive_weight = get_finite(c, "positive_weight");
  const json& adam = get(c, "adam");
  m.config.beta1 = get_finite(adam, "beta1");
  m.config.beta2 = get_finite(adam, "beta2");
  m.config.adam_eps = get_finite(adam, "eps");
  m.seed = get(j, "seed").get<std::uint64_t>();
  m.trained_epochs = static_cast<int>(get_int(j, "trained_epochs"));
  m.loss_history = get(j, "loss_history").get<std::vector<double>>();

  const json& layers = get(j, "layers");
  if (!layers.is_array()) throw SchemaError("layers must be an array");
  std::vector<int> widths = m.config.hidden;
  widths.push_back(1);
  if (layers.size() != widths.size()) throw SchemaError("layer count does not match hidden sizes");
  int in = static_cast<int>(kNumFeatures);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    DenseLayer L;
    L.in = static_cast<int>(get_int(layers[l], "in"));
    L.out = static_cast<int>(get_int(layers[l], "out"));
    if (L.in != in || L.out != widths[l]) throw SchemaError("layer shapes do not chain");
    L.weights = get(layers[l], "weights").get<std::vector<double>>();
    L.bias = get(layers[l], "bias").get<std::vector<double>>();
    if (L.weights.size() != static_cast<std::size_t>(L.in) * L.out ||
        L.bias.size() != static_cast<std::size_t>(L.out)) {
      throw SchemaError("layer parameter count does not match its shape");
    }
    for (double v : L.weights) if (!std::isfinite(v)) throw SchemaError("non-finite weight");
    for (double v : L.bias) if (!std::isfinite(v)) throw SchemaError("non-finite bias");
    in = L.out;
    m.layers.push_back(std::move(L));
  }
  return m;
}

}  // namespace

EstimatorKind parse_estimator_kind(std::string_view name) {
  if (name == "rf" || name == "random_forest") return EstimatorKind::RandomForest;
  if (name == "mlp") return EstimatorKind::Mlp;
  fail(ErrorKind::InvalidArgument, "unknown estimator '" + std::string(name) + "'");
}

std::string_view estimator_name(EstimatorKind kind) {
  return kind == EstimatorKind::RandomForest ? "rf" : "mlp";
}

EstimatorKind kind_of(const ObjectnessModel& model) {
  return std::holds_alternative<RandomForestModel>(model) ? EstimatorKind::RandomForest
                                                          : EstimatorKind::Mlp;
}

const FeatureMask& model_mask(const ObjectnessModel& model) {
  return std::visit([](const auto& m) -> const FeatureMask& { return m.mask; }, model);
}

std::vector<double> predict_objectness(const ObjectnessModel& model, const FeatureMatrix& X,
                                       Exec exec) {
  if (!(X.mask == model_mask(model))) {
    fail(ErrorKind::FeatureMismatch, "features were built with mask '" + X.mask.to_string() +
                                         "' but the model expects '" +
                                         model_mask(model).to_string() + "'");
  }
  std::vector<double> p = std::visit([&](const auto& m) { return m.predict(X.rows, exec); }, model);
  for (auto& v : p) v = std::clamp(v, 0.0, 1.0);
  return p;
}

std::string serialize_model(const ObjectnessModel& model) {
  json j = std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, RandomForestModel>) {
          return forest_json(m);
        } else {
          return mlp_json(m);
        }
      },
      model);
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["feature_order"] = feature_order();
  j["dropped_features"] = to_json(model_mask(model));
  return j.dump(1) + "\n";
}

ObjectnessModel parse_model(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 1, e.what());
  }
  try {
    if (!j.is_object() || get(j, "format") != kModelFormat) throw SchemaError("not an objectness model");
    if (get(j, "version") != kModelVersion) throw SchemaError("unsupported model version");
    if (get(j, "feature_order") != feature_order()) {
      fail(ErrorKind::FeatureMismatch, source + ": model feature order differs from " +
                                           feature_order().dump());
    }
    const FeatureMask mask = mask_from_json(get(j, "dropped_features"));
    const json& kind = get(j, "kind");
    if (kind == "random_forest") return forest_from_json(j, mask);
    if (kind == "mlp") return mlp_from_json(j, mask);
    throw SchemaError("unknown model kind");
  } catch (const SchemaError& e) {
    throw SchemaError(source + ": " + e.what());
  } catch (const json::exception& e) {
    throw SchemaError(source + ": " + e.what());
  }
}

void save_model(const ObjectnessModel& model, const std::filesystem::path& path) {
  write_text_file(path, serialize_model(model));
}

ObjectnessModel load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path), path.string());
}

}  // namespace openset
