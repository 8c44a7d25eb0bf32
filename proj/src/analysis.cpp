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

#include "openset/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "openset/error.hpp"

namespace openset {

using nlohmann::json;

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::EmptySample, "Wasserstein-1 of an empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::size_t i = 0, j = 0;
  double prev = std::min(x.front(), y.front());
  double total = 0.0;
  while (i < x.size() || j < y.size()) {
    const double next = std::min(i < x.size() ? x[i] : inf, j < y.size() ? y[j] : inf);
    const double fa = static_cast<double>(i) / n;
    const double fb = static_cast<double>(j) / m;
    total += std::abs(fa - fb) * (next - prev);
    while (i < x.size() && x[i] == next) ++i;
    while (j < y.size() && y[j] == next) ++j;
    prev = next;
  }
  return total;
}

namespace {

double quantile_sorted(const std::vector<double>& s, double p) {
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) fail(ErrorKind::DegenerateSample, "KDE needs at least two samples");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) fail(ErrorKind::DegenerateSample, "KDE sample has zero spread");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

KdeCurve kde(std::span<const double> samples, std::optional<double> bandwidth, Exec exec) {
  KdeCurve c;
  c.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(samples);
  if (!(c.bandwidth > 0.0) || !std::isfinite(c.bandwidth)) {
    fail(ErrorKind::InvalidArgument, "KDE bandwidth must be positive");
  }
  if (samples.size() < 2) fail(ErrorKind::DegenerateSample, "KDE needs at least two samples");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  if (!(*hi_it > *lo_it)) fail(ErrorKind::DegenerateSample, "KDE sample has zero spread");
  const double lo = *lo_it - 3.0 * c.bandwidth;
  const double hi = *hi_it + 3.0 * c.bandwidth;
  c.x.resize(kKdeGridPoints);
  c.density.resize(kKdeGridPoints);
  const double step = (hi - lo) / static_cast<double>(kKdeGridPoints - 1);
  const double norm = 1.0 / (static_cast<double>(samples.size()) * c.bandwidth *
                             std::sqrt(2.0 * std::numbers::pi));
  const double inv_h = 1.0 / c.bandwidth;
  parallel_for(kKdeGridPoints, exec, [&](std::size_t g) {
    const double x = g + 1 == kKdeGridPoints ? hi : lo + step * static_cast<double>(g);
    double s = 0.0;
    for (double v : samples) {
      const double u = (x - v) * inv_h;
      s += std::exp(-0.5 * u * u);
    }
    c.x[g] = x;
    c.density[g] = s * norm;
  });
  return c;
}

SeparationReport separation_report(const ScoredDump& scored, const AnnotatedDataset& dataset,
                                   Exec exec) {
  const auto& records = scored.dump->records;
  std::vector<std::vector<Role>> roles(records.size());
  parallel_for(records.size(), exec, [&](std::size_t i) {
    const auto& rec = records[i];
    matching_image(dataset, rec.meta);
    roles[i] = assign_roles(rec.queries, dataset.gts(rec.meta.image_id), rec.meta);
  });

  // samples[score][role]
  std::array<std::array<std::vector<double>, 3>, 3> samples;
  SeparationReport report;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t q = 0; q < roles[i].size(); ++q) {
      const auto r = static_cast<std::size_t>(roles[i][q]);
      const auto& f = scored.features[i][q];
      samples[0][r].push_back(f.p_conf);
      samples[1][r].push_back(f.f_nan);
      samples[2][r].push_back(scored.p_obj[i][q]);
      ++report.role_counts[r];
    }
  }
  constexpr std::size_t kKnown = 0, kUnknown = 1, kBg = 2;
  for (std::size_t r = 0; r < 3; ++r) {
    if (report.role_counts[r] == 0) {
      report.warnings.push_back("EmptySample: no " + std::string(kRoleNames[r]) + " queries");
    }
  }
  auto w1 = [](const std::vector<double>& a, const std::vector<double>& b) -> std::optional<double> {
    if (a.empty() || b.empty()) return std::nullopt;
    return wasserstein1(a, b);
  };
  for (std::size_t s = 0; s < 3; ++s) {
    report.table[s].bg_known = w1(samples[s][kBg], samples[s][kKnown]);
    report.table[s].bg_unknown = w1(samples[s][kBg], samples[s][kUnknown]);
    report.table[s].unknown_known = w1(samples[s][kUnknown], samples[s][kKnown]);
    for (std::size_t r = 0; r < 3; ++r) {
      try {
        report.curves[s][r] = kde(samples[s][r], std::nullopt, exec);
      } catch (const Error& e) {
        if (report.role_counts[r] > 0) {
          report.warnings.push_back("no KDE for " + std::string(kScoreNames[s]) + "/" +
                                    std::string(kRoleNames[r]) + ": " + e.what());
        }
      }
    }
  }
  return report;
}

SeparationReport separation_report(const FeatureDump& dump, const AnnotatedDataset& dataset,
                                   const ObjectnessModel& model, Exec exec) {
  return separation_report(score_dump(dump, model, exec), dataset, exec);
}

std::string serialize_separation(const SeparationReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json table = json::object();
  for (std::size_t s = 0; s < 3; ++s) {
    table[std::string(kScoreNames[s])] = {{"bg_known", opt(r.table[s].bg_known)},
                                          {"bg_unknown", opt(r.table[s].bg_unknown)},
                                          {"unknown_known", opt(r.table[s].unknown_known)}};
  }
  json bandwidths = json::object();
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t k = 0; k < 3; ++k) {
      bandwidths[std::string(kScoreNames[s])][std::string(kRoleNames[k])] =
          r.curves[s][k] ? json(r.curves[s][k]->bandwidth) : json(nullptr);
    }
  }
  json counts = json::object();
  for (std::size_t k = 0; k < 3; ++k) counts[std::string(kRoleNames[k])] = r.role_counts[k];
  return json{{"format", "openset-separation"},
              {"version", 1},
              {"wasserstein1", table},
              {"kde_bandwidth", bandwidths},
              {"role_counts", counts},
              {"warnings", r.warnings}}
             .dump(2) +
         "\n";
}

std::string kde_plot_data(const SeparationReport& r) {
  std::ostringstream os;
  os << "score\trole\tx\tdensity\n";
  char buf[160];
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t k = 0; k < 3; ++k) {
      if (!r.curves[s][k]) continue;
      const KdeCurve& c = *r.curves[s][k];
      for (std::size_t g = 0; g < c.x.size(); ++g) {
        std::snprintf(buf, sizeof buf, "%s\t%s\t%.17g\t%.17g\n", kScoreNames[s].data(),
                      kRoleNames[k].data(), c.x[g], c.density[g]);
        os << buf;
      }
    }
  }
  return os.str();
}

std::string format_separation_table(const SeparationReport& r) {
  std::ostringstream os;
  char buf[160];
  auto cell = [](const std::optional<double>& v) {
    char b[32];
    if (v) {
      std::snprintf(b, sizeof b, "%8.3f", *v);
    } else {
      std::snprintf(b, sizeof b, "%8s", "n/a");
    }
    return std::string(b);
  };
  std::snprintf(buf, sizeof buf, "%-10s | %8s | %8s | %8s\n", "Metric", "Bg-Kn", "Bg-Unk", "Unk-Kn");
  os << buf << std::string(45, '-') << '\n';
  for (std::size_t s = 0; s < 3; ++s) {
    os << std::string(kScoreNames[s]) << std::string(10 - kScoreNames[s].size(), ' ') << " | "
       << cell(r.table[s].bg_known) << " | " << cell(r.table[s].bg_unknown) << " | "
       << cell(r.table[s].unknown_known) << '\n';
  }
  return os.str();
}

}  // namespace openset
