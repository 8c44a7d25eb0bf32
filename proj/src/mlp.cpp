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

#include "openset/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "openset/error.hpp"
#include "openset/rng.hpp"

namespace openset {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Activations of one forward pass, kept for backpropagation.
struct Trace {
  std::vector<std::vector<double>> act;  // act[0] = input, act[l+1] = layer l output

  explicit Trace(const std::vector<DenseLayer>& layers) : act(layers.size() + 1) {
    act[0].resize(kNumFeatures);
    for (std::size_t l = 0; l < layers.size(); ++l) act[l + 1].resize(layers[l].out);
  }
};

double forward(const std::vector<DenseLayer>& layers, const FeatureRow& x, Trace& tr) {
  std::copy(x.begin(), x.end(), tr.act[0].begin());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& L = layers[l];
    const auto& in = tr.act[l];
    auto& out = tr.act[l + 1];
    const bool last = l + 1 == layers.size();
    for (int o = 0; o < L.out; ++o) {
      const double* w = &L.weights[static_cast<std::size_t>(o) * L.in];
      double s = L.bias[o];
      for (int i = 0; i < L.in; ++i) s += w[i] * in[i];
      out[o] = last ? s : std::max(s, 0.0);
    }
  }
  return tr.act.back()[0];
}

double example_loss(double z, int y, double pos_w) {
  return y ? pos_w * softplus(-z) : softplus(z);
}

double example_dlogit(double z, int y, double pos_w) {
  return y ? pos_w * (sigmoid(z) - 1.0) : sigmoid(z);
}

MlpGradients zero_like(const std::vector<DenseLayer>& layers) {
  MlpGradients g;
  for (const auto& L : layers) {
    g.layers.push_back({L.in, L.out, std::vector<double>(L.weights.size(), 0.0),
                        std::vector<double>(L.bias.size(), 0.0)});
  }
  return g;
}

// Accumulates scale * dLoss/dparams for one example into grad.
void backward(const std::vector<DenseLayer>& layers, const Trace& tr, double dlogit,
              MlpGradients& grad, std::vector<double>& delta, std::vector<double>& next) {
  delta.assign(1, dlogit);
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& L = layers[l];
    DenseLayer& G = grad.layers[l];
    const auto& in = tr.act[l];
    for (int o = 0; o < L.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      G.bias[o] += d;
      double* gw = &G.weights[static_cast<std::size_t>(o) * L.in];
      for (int i = 0; i < L.in; ++i) gw[i] += d * in[i];
    }
    if (l == 0) break;
    next.assign(L.in, 0.0);
    for (int o = 0; o < L.out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* w = &L.weights[static_cast<std::size_t>(o) * L.in];
      for (int i = 0; i < L.in; ++i) next[i] += d * w[i];
    }
    // Rectifier derivative, taken as 0 at the kink.
    for (int i = 0; i < L.in; ++i) {
      if (!(in[i] > 0.0)) next[i] = 0.0;
    }
    delta.swap(next);
  }
}

void check_config(const MlpConfig& cfg) {
  if (cfg.hidden.empty() || std::any_of(cfg.hidden.begin(), cfg.hidden.end(), [](int h) { return h < 1; }) ||
      !(cfg.learning_rate > 0.0) || cfg.batch_size < 1 || cfg.epochs < 0 || cfg.patience < 1 ||
      !(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0) ||
      !(cfg.positive_weight > 0.0)) {
    fail(ErrorKind::InvalidArgument, "invalid MLP configuration");
  }
}

struct Adam {
  std::vector<DenseLayer> m, v;
  long long t = 0;
};

void adam_step(std::vector<DenseLayer>& layers, const MlpGradients& g, Adam& st, const MlpConfig& cfg) {
  ++st.t;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  auto update = [&](std::vector<double>& p, const std::vector<double>& gr, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gr[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gr[i] * gr[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, g.layers[l].weights, st.m[l].weights, st.v[l].weights);
    update(layers[l].bias, g.layers[l].bias, st.m[l].bias, st.v[l].bias);
  }
}

void scale(MlpGradients& g, double s) {
  for (auto& L : g.layers) {
    for (auto& w : L.weights) w *= s;
    for (auto& b : L.bias) b *= s;
  }
}

double subset_loss(const MlpModel& model, const FeatureMatrix& X, std::span<const int> y,
                   std::span<const std::size_t> idx) {
  Trace tr(model.layers);
  double sum = 0.0;
  for (std::size_t i : idx) {
    sum += example_loss(forward(model.layers, X.rows[i], tr), y[i], model.config.positive_weight);
  }
  return idx.empty() ? 0.0 : sum / static_cast<double>(idx.size());
}

}  // namespace

double MlpModel::logit(const FeatureRow& x) const {
  Trace tr(layers);
  return forward(layers, x, tr);
}

double MlpModel::predict(const FeatureRow& x) const { return sigmoid(logit(x)); }

std::vector<double> MlpModel::predict(std::span<const FeatureRow> rows, Exec exec) const {
  std::vector<double> out(rows.size());
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
  if (exec == Exec::Serial) {
    Trace tr(layers);
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = sigmoid(forward(layers, rows[i], tr));
    return out;
  }
#pragma omp parallel
  {
    Trace tr(layers);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = sigmoid(forward(layers, rows[i], tr));
  }
  return out;
}

MlpModel init_mlp(const MlpConfig& config, std::uint64_t seed, const FeatureMask& mask) {
  check_config(config);
  MlpModel model;
  model.config = config;
  model.seed = seed;
  model.mask = mask;
  Rng rng(derive_seed(seed, 0));
  int in = static_cast<int>(kNumFeatures);
  std::vector<int> widths = config.hidden;
  widths.push_back(1);
  for (int out : widths) {
    DenseLayer L{in, out, std::vector<double>(static_cast<std::size_t>(in) * out),
                 std::vector<double>(out)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& w : L.weights) w = rng.uniform(-bound, bound);
    for (auto& b : L.bias) b = rng.uniform(-bound, bound);
    model.layers.push_back(std::move(L));
    in = out;
  }
  return model;
}

double mlp_loss(const MlpModel& model, std::span<const FeatureRow> rows, std::span<const int> y,
                MlpGradients* grad) {
  if (rows.size() != y.size()) fail(ErrorKind::LengthMismatch, "rows and labels differ in length");
  if (grad) *grad = zero_like(model.layers);
  if (rows.empty()) return 0.0;
  Trace tr(model.layers);
  std::vector<double> delta, next;
  double sum = 0.0;
  const double pw = model.config.positive_weight;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double z = forward(model.layers, rows[i], tr);
    sum += example_loss(z, y[i], pw);
    if (grad) backward(model.layers, tr, example_dlogit(z, y[i], pw), *grad, delta, next);
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  if (grad) scale(*grad, inv);
  return sum * inv;
}

MlpModel train_mlp(const FeatureMatrix& X, std::span<const int> y, const MlpConfig& config,
                   std::uint64_t seed) {
  if (X.size() != y.size()) fail(ErrorKind::LengthMismatch, "feature rows and labels differ in length");
  MlpModel model = init_mlp(config, seed, X.mask);
  if (config.epochs == 0 || X.size() == 0) return model;

  std::vector<std::size_t> train(X.size());
  std::iota(train.begin(), train.end(), std::size_t{0});
  std::vector<std::size_t> val;
  if (config.early_stop) {
    Rng split_rng(derive_seed(seed, 1));
    shuffle(train, split_rng);
    const auto n_val = static_cast<std::size_t>(
        std::ceil(config.validation_fraction * static_cast<double>(X.size())));
    if (n_val > 0 && n_val < train.size()) {
      val.assign(train.end() - static_cast<std::ptrdiff_t>(n_val), train.end());
      train.resize(train.size() - n_val);
      std::sort(val.begin(), val.end());
      std::sort(train.begin(), train.end());
    }
  }

  Adam adam;
  adam.m = zero_like(model.layers).layers;
  adam.v = adam.m;
  Rng shuffle_rng(derive_seed(seed, 2));
  Trace tr(model.layers);
  std::vector<double> delta, next;
  MlpGradients grad = zero_like(model.layers);
  const double pw = config.positive_weight;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  double best_val = 0.0;
  std::vector<DenseLayer> best_layers;
  int best_epoch = 0;
  int stale = 0;

  std::vector<std::size_t> order = train;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      for (auto& L : grad.layers) {
        std::fill(L.weights.begin(), L.weights.end(), 0.0);
        std::fill(L.bias.begin(), L.bias.end(), 0.0);
      }
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        const double z = forward(model.layers, X.rows[i], tr);
        backward(model.layers, tr, example_dlogit(z, y[i], pw), grad, delta, next);
      }
      scale(grad, 1.0 / static_cast<double>(stop - start));
      adam_step(model.layers, grad, adam, config);
    }

    const double loss = subset_loss(model, X, y, train);
    if (!std::isfinite(loss)) {
      fail(ErrorKind::NonFiniteLoss, "training loss diverged at epoch " + std::to_string(epoch));
    }
    model.loss_history.push_back(loss);
    model.trained_epochs = epoch;

    if (!val.empty()) {
      const double vl = subset_loss(model, X, y, val);
      if (best_layers.empty() || vl < best_val) {
        best_val = vl;
        best_layers = model.layers;
        best_epoch = epoch;
        stale = 0;
      } else if (++stale >= config.patience) {
        break;
      }
    }
  }
  if (!best_layers.empty()) {
    model.layers = std::move(best_layers);
    model.trained_epochs = best_epoch;
  }
  return model;
}

}  // namespace openset
