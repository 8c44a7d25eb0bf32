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

#include "openset/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "openset/error.hpp"
#include "openset/rng.hpp"

namespace openset {

void SynthConfig::validate() const {
  auto frac_ok = [](double f) { return f >= 0.0 && f <= 1.0; };
  const double sum = known_fraction + unknown_fraction + artifact_fraction + background_fraction;
  if (n_images < 1 || queries_per_image < 1 || feat_dim < 1 || n_known_classes < 1 ||
      !frac_ok(known_fraction) || !frac_ok(unknown_fraction) || !frac_ok(artifact_fraction) ||
      !frac_ok(background_fraction) || std::abs(sum - 1.0) > 1e-9 || min_image_side < 32 ||
      max_image_side < min_image_side || !(min_object_iou > 0.5 && min_object_iou < 1.0)) {
    fail(ErrorKind::InvalidArgument, "invalid synthetic data configuration");
  }
  for (const RoleBand* b : {&known, &unknown, &background, &artifact}) {
    if (!(b->conf_lo >= 0.0 && b->conf_lo <= b->conf_hi && b->conf_hi <= 1.0 && b->nan_sd >= 0.0)) {
      fail(ErrorKind::InvalidArgument, "invalid role band");
    }
  }
}

Role as_role(PlantedRole planted) {
  switch (planted) {
    case PlantedRole::Known: return Role::Known;
    case PlantedRole::Unknown: return Role::Unknown;
    default: return Role::Background;
  }
}

std::string_view planted_role_name(PlantedRole planted) {
  switch (planted) {
    case PlantedRole::Known: return "known";
    case PlantedRole::Unknown: return "unknown";
    case PlantedRole::Background: return "background";
    case PlantedRole::EdgeArtifact: return "edge_artifact";
  }
  return "background";
}

namespace {

// Pixel-space helpers work on one image's dimensions.
class ImageSampler {
 public:
  ImageSampler(const ImageMeta& meta, Rng& rng) : meta_(meta), rng_(rng) {}

  // Object box fully inside the image, side 8%..35% of the image.
  Box object_box() {
    const double w = rng_.uniform(0.08, 0.35), h = rng_.uniform(0.08, 0.35);
    const double margin = 0.02;
    return {rng_.uniform(margin + 0.5 * w, 1.0 - margin - 0.5 * w),
            rng_.uniform(margin + 0.5 * h, 1.0 - margin - 0.5 * h), w, h};
  }

  // Perturbed copy of gt with IoU >= min_iou.
  Box jittered(const Box& gt, double min_iou) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double w = std::clamp(gt.w * rng_.uniform(0.85, 1.15), 0.0, 1.0);
      const double h = std::clamp(gt.h * rng_.uniform(0.85, 1.15), 0.0, 1.0);
      const double cx = std::clamp(gt.cx + gt.w * rng_.uniform(-0.08, 0.08), 0.5 * w, 1.0 - 0.5 * w);
      const double cy = std::clamp(gt.cy + gt.h * rng_.uniform(-0.08, 0.08), 0.5 * h, 1.0 - 0.5 * h);
      const Box b{cx, cy, w, h};
      if (iou(b, gt, meta_) >= min_iou) return b;
    }
    return gt;
  }

  // Same size range as objects, so geometry alone says little.
  Box background_box() {
    const double w = rng_.uniform(0.06, 0.4), h = rng_.uniform(0.06, 0.4);
    return {rng_.uniform(0.5 * w, 1.0 - 0.5 * w), rng_.uniform(0.5 * h, 1.0 - 0.5 * h), w, h};
  }

  // Tiny box flush against one image edge.
  Box artifact_box() {
    const double w = rng_.uniform(0.01, 0.05), h = rng_.uniform(0.01, 0.05);
    double cx = rng_.uniform(0.5 * w, 1.0 - 0.5 * w);
    double cy = rng_.uniform(0.5 * h, 1.0 - 0.5 * h);
    switch (rng_.index(4)) {
      case 0: cx = 0.5 * w; break;
      case 1: cx = 1.0 - 0.5 * w; break;
      case 2: cy = 0.5 * h; break;
      default: cy = 1.0 - 0.5 * h; break;
    }
    return {cx, cy, w, h};
  }

  double max_iou(const Box& b, const std::vector<GroundTruth>& gts) const {
    double best = 0.0;
    for (const auto& g : gts) best = std::max(best, iou(b, g.box, meta_));
    return best;
  }

 private:
  const ImageMeta& meta_;
  Rng& rng_;
};

// Activation vector whose negative-aware norm equals target: k positive
// components, the rest negative, magnitudes rescaled so l1 / k = target.
std::vector<double> feature_vector(int dim, double target, Rng& rng) {
  const int lo = std::max(1, static_cast<int>(std::ceil(0.3 * dim)));
  const int hi = std::max(lo, static_cast<int>(std::floor(0.7 * dim)));
  const int active = lo + static_cast<int>(rng.index(static_cast<std::uint64_t>(hi - lo + 1)));
  std::vector<double> z(dim);
  double sum = 0.0;
  for (auto& v : z) {
    v = rng.uniform(0.5, 1.5);
    sum += v;
  }
  const double c = target * active / sum;
  std::vector<int> positions(dim);
  for (int i = 0; i < dim; ++i) positions[i] = i;
  shuffle(positions, rng);
  for (int i = 0; i < dim; ++i) {
    double& v = z[positions[i]];
    v *= c;
    if (i >= active) v = -v;
  }
  return z;
}

std::vector<double> class_scores(int n_classes, double p_conf, int top_class, Rng& rng) {
  std::vector<double> cls(n_classes);
  for (auto& v : cls) v = rng.uniform(0.0, 0.5 * p_conf);
  cls[top_class] = p_conf;
  return cls;
}

int role_count(double fraction, int queries) {
  return static_cast<int>(std::lround(fraction * queries));
}

}  // namespace

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  SynthData data;
  data.dump.feat_dim = static_cast<std::size_t>(cfg.feat_dim);
  data.dump.num_classes = static_cast<std::size_t>(cfg.n_known_classes);
  data.dump.metadata = {{"generator", "openset-synth"}, {"seed", std::to_string(cfg.seed)}};
  for (int c = 1; c <= cfg.n_known_classes; ++c) {
    data.dataset.known.categories.push_back({c, "class_" + std::to_string(c)});
  }

  const int Q = cfg.queries_per_image;
  const int n_known = std::min(Q, role_count(cfg.known_fraction, Q));
  const int n_unknown = std::min(Q - n_known, role_count(cfg.unknown_fraction, Q));
  const int n_artifact = std::min(Q - n_known - n_unknown, role_count(cfg.artifact_fraction, Q));
  const int n_objects = n_known + n_unknown;

  for (int img = 0; img < cfg.n_images; ++img) {
    char id[64];
    std::snprintf(id, sizeof id, "%s_%05d", cfg.id_prefix.c_str(), img);
    ImageMeta meta{id,
                   cfg.min_image_side + static_cast<int>(rng.index(cfg.max_image_side - cfg.min_image_side + 1)),
                   cfg.min_image_side + static_cast<int>(rng.index(cfg.max_image_side - cfg.min_image_side + 1))};
    ImageSampler sampler(meta, rng);

    std::vector<GroundTruth> gts;
    for (int o = 0; o < n_objects; ++o) {
      Box b = sampler.object_box();
      for (int attempt = 0; attempt < 200 && sampler.max_iou(b, gts) > 0.05; ++attempt) {
        b = sampler.object_box();
      }
      GroundTruth g{b, std::nullopt};
      if (o < n_known) g.known_class = 1 + static_cast<int>(rng.index(cfg.n_known_classes));
      gts.push_back(g);
    }

    std::vector<PlantedRole> roles;
    std::vector<QueryOutput> queries;
    auto add = [&](PlantedRole role, const Box& box, const RoleBand& band, int top_class) {
      const double p_conf = rng.uniform(band.conf_lo, band.conf_hi);
      const double target = std::max(cfg.nan_floor, rng.normal(band.nan_mean, band.nan_sd));
      QueryOutput q;
      q.feat = feature_vector(cfg.feat_dim, target, rng);
      q.cls = class_scores(cfg.n_known_classes, p_conf, top_class, rng);
      q.box = box;
      queries.push_back(std::move(q));
      roles.push_back(role);
    };
    for (int o = 0; o < n_objects; ++o) {
      const GroundTruth& g = gts[o];
      const Box b = sampler.jittered(g.box, cfg.min_object_iou);
      if (g.is_known()) {
        add(PlantedRole::Known, b, cfg.known, *g.known_class - 1);
      } else {
        add(PlantedRole::Unknown, b, cfg.unknown, static_cast<int>(rng.index(cfg.n_known_classes)));
      }
    }
    for (int a = 0; a < n_artifact; ++a) {
      Box b = sampler.artifact_box();
      for (int attempt = 0; attempt < 50 && sampler.max_iou(b, gts) >= 0.3; ++attempt) b = sampler.artifact_box();
      add(PlantedRole::EdgeArtifact, b, cfg.artifact, static_cast<int>(rng.index(cfg.n_known_classes)));
    }
    while (static_cast<int>(queries.size()) < Q) {
      Box b = sampler.background_box();
      for (int attempt = 0; attempt < 50 && sampler.max_iou(b, gts) >= 0.3; ++attempt) b = sampler.background_box();
      add(PlantedRole::Background, b, cfg.background, static_cast<int>(rng.index(cfg.n_known_classes)));
    }

    // Shuffle so query position carries no role information.
    std::vector<std::size_t> perm(queries.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    shuffle(perm, rng);
    DumpRecord rec;
    rec.meta = meta;
    std::vector<PlantedRole> shuffled_roles;
    for (std::size_t i : perm) {
      rec.queries.push_back(std::move(queries[i]));
      shuffled_roles.push_back(roles[i]);
    }
    data.dump.records.push_back(std::move(rec));
    data.roles.push_back(std::move(shuffled_roles));
    data.dataset.images.push_back(meta);
    if (!gts.empty()) data.dataset.ground_truths[meta.image_id] = std::move(gts);
  }
  return data;
}

void write_planted_roles(const SynthData& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  for (std::size_t i = 0; i < data.dump.records.size(); ++i) {
    nlohmann::json roles = nlohmann::json::array();
    for (PlantedRole r : data.roles[i]) roles.push_back(planted_role_name(r));
    out << nlohmann::json{{"image_id", data.dump.records[i].meta.image_id}, {"roles", roles}}.dump()
        << '\n';
  }
  out.flush();
  if (!out) fail(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

}  // namespace openset
