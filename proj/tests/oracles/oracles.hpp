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

#pragma once

// Reference implementations written without the library's code paths. Slow
// on purpose: exhaustive search where the library is greedy, quadratic
// transport where it merges sorted samples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

inline double naive_nan(const std::vector<double>& z) {
  double l1 = 0.0;
  int active = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    l1 += z[i] < 0 ? -z[i] : z[i];
    if (z[i] > 0) active++;
  }
  if (active == 0) return 0.0;
  return l1 / active;
}

struct NBox {
  double cx, cy, w, h;
};

// Pixel-space IoU written from the corner definition.
inline double box_iou(const NBox& a, const NBox& b, double W, double H) {
  const double ax1 = (a.cx - a.w / 2) * W, ax2 = (a.cx + a.w / 2) * W;
  const double ay1 = (a.cy - a.h / 2) * H, ay2 = (a.cy + a.h / 2) * H;
  const double bx1 = (b.cx - b.w / 2) * W, bx2 = (b.cx + b.w / 2) * W;
  const double by1 = (b.cy - b.h / 2) * H, by2 = (b.cy + b.h / 2) * H;
  const double iw = std::min(ax2, bx2) - std::max(ax1, bx1);
  const double ih = std::min(ay2, by2) - std::max(ay1, by1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter;
  if (uni <= 0) return 0.0;
  return std::min(1.0, inter / uni);
}

// Best matching over every injective partial assignment with entries >= thr,
// compared row by row: a matched row beats an unmatched one, then higher IoU,
// then lower column. Returns the column per row, -1 for unmatched.
inline std::vector<int> exhaustive_match(const std::vector<std::vector<double>>& iou, double thr) {
  const int rows = static_cast<int>(iou.size());
  const int cols = rows ? static_cast<int>(iou[0].size()) : 0;
  std::vector<int> cur(rows, -1), best;
  std::vector<char> used(cols, 0);
  auto better = [&](const std::vector<int>& a, const std::vector<int>& b) {
    for (int r = 0; r < rows; ++r) {
      const bool ma = a[r] >= 0, mb = b[r] >= 0;
      if (ma != mb) return ma;
      if (!ma) continue;
      const double va = iou[r][a[r]], vb = iou[r][b[r]];
      if (va != vb) return va > vb;
      if (a[r] != b[r]) return a[r] < b[r];
    }
    return false;
  };
  auto rec = [&](auto&& self, int r) -> void {
    if (r == rows) {
      if (best.empty() || better(cur, best)) best = cur;
      return;
    }
    cur[r] = -1;
    self(self, r + 1);
    for (int c = 0; c < cols; ++c) {
      if (used[c] || iou[r][c] < thr) continue;
      used[c] = 1;
      cur[r] = c;
      self(self, r + 1);
      used[c] = 0;
      cur[r] = -1;
    }
  };
  rec(rec, 0);
  if (best.empty()) best.assign(rows, -1);
  return best;
}

struct ODet {
  int image;
  NBox box;
  double conf;
};

struct OImage {
  double W, H;
  std::vector<NBox> gts;
};

// TP flag per detection in ranking order (confidence desc, image asc, input
// order asc), from exhaustive per-image matching.
inline std::vector<char> brute_tp(const std::vector<ODet>& dets, const std::vector<OImage>& images,
                                  double thr) {
  std::vector<int> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dets[a].conf != dets[b].conf) return dets[a].conf > dets[b].conf;
    if (dets[a].image != dets[b].image) return dets[a].image < dets[b].image;
    return a < b;
  });
  std::vector<char> tp(order.size(), 0);
  for (int img = 0; img < static_cast<int>(images.size()); ++img) {
    std::vector<int> ranks;
    for (int k = 0; k < static_cast<int>(order.size()); ++k) {
      if (dets[order[k]].image == img) ranks.push_back(k);
    }
    std::vector<std::vector<double>> m(ranks.size(), std::vector<double>(images[img].gts.size()));
    for (std::size_t r = 0; r < ranks.size(); ++r) {
      for (std::size_t c = 0; c < images[img].gts.size(); ++c) {
        m[r][c] = box_iou(dets[order[ranks[r]]].box, images[img].gts[c], images[img].W, images[img].H);
      }
    }
    const auto match = exhaustive_match(m, thr);
    for (std::size_t r = 0; r < ranks.size(); ++r) tp[ranks[r]] = match[r] >= 0;
  }
  return tp;
}

// Interpolated precision at recall r: the best precision at any rank whose
// recall reaches r.
inline double interpolated_precision(const std::vector<char>& tp, std::size_t n_gt, double r) {
  double best = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    hits += tp[k] ? 1 : 0;
    const double rec = static_cast<double>(hits) / static_cast<double>(n_gt);
    const double prec = static_cast<double>(hits) / static_cast<double>(k + 1);
    if (rec >= r) best = std::max(best, prec);
  }
  return best;
}

inline double brute_ap101(const std::vector<char>& tp, std::size_t n_gt) {
  if (n_gt == 0) return 0.0;
  double sum = 0.0;
  for (int i = 0; i <= 100; ++i) sum += interpolated_precision(tp, n_gt, i / 100.0);
  return sum / 101.0;
}

inline double brute_ap_all_point(const std::vector<char>& tp, std::size_t n_gt) {
  if (n_gt == 0) return 0.0;
  double sum = 0.0, prev = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    if (!tp[k]) continue;
    hits++;
    const double rec = static_cast<double>(hits) / static_cast<double>(n_gt);
    sum += (rec - prev) * interpolated_precision(tp, n_gt, rec);
    prev = rec;
  }
  return sum;
}

// Exact transport cost between uniform empirical measures of sizes m and n.
// Each a_i supplies n units and each b_j takes m units; successive shortest
// paths on the bipartite graph, result divided by m * n.
inline double transport_w1(const std::vector<double>& a, const std::vector<double>& b) {
  const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
  const int N = m + n + 2, S = m + n, T = m + n + 1;
  struct Edge {
    int to, rev;
    long long cap;
    double cost;
  };
  std::vector<std::vector<Edge>> g(N);
  auto add = [&](int u, int v, long long cap, double cost) {
    g[u].push_back({v, static_cast<int>(g[v].size()), cap, cost});
    g[v].push_back({u, static_cast<int>(g[u].size()) - 1, 0, -cost});
  };
  for (int i = 0; i < m; ++i) add(S, i, n, 0.0);
  for (int j = 0; j < n; ++j) add(m + j, T, m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) add(i, m + j, static_cast<long long>(m) * n, std::fabs(a[i] - b[j]));
  }
  long long flow = 0;
  double cost = 0.0;
  const long long need = static_cast<long long>(m) * n;
  while (flow < need) {
    std::vector<double> dist(N, std::numeric_limits<double>::infinity());
    std::vector<int> pv(N, -1), pe(N, -1);
    dist[S] = 0.0;
    for (int it = 0; it < N; ++it) {
      bool changed = false;
      for (int u = 0; u < N; ++u) {
        if (dist[u] == std::numeric_limits<double>::infinity()) continue;
        for (int e = 0; e < static_cast<int>(g[u].size()); ++e) {
          const Edge& ed = g[u][e];
          if (ed.cap > 0 && dist[u] + ed.cost < dist[ed.to] - 1e-15) {
            dist[ed.to] = dist[u] + ed.cost;
            pv[ed.to] = u;
            pe[ed.to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (pv[T] < 0) break;
    long long push = need - flow;
    for (int v = T; v != S; v = pv[v]) push = std::min(push, g[pv[v]][pe[v]].cap);
    for (int v = T; v != S; v = pv[v]) {
      Edge& ed = g[pv[v]][pe[v]];
      ed.cap -= push;
      g[v][ed.rev].cap += push;
      cost += static_cast<double>(push) * ed.cost;
    }
    flow += push;
  }
  return cost / static_cast<double>(need);
}

// Equal sizes: the best of all n! pairings.
inline double permutation_w1(const std::vector<double>& a, std::vector<double> b) {
  std::sort(b.begin(), b.end());
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    best = std::min(best, s / static_cast<double>(a.size()));
  } while (std::next_permutation(b.begin(), b.end()));
  return best;
}

// Combined threshold metric and its first-maximum index, straight from the
// definition.
inline std::vector<double> brute_combined(const std::vector<double>& map, const std::vector<double>& ru) {
  double mm = 0.0, mr = 0.0;
  for (double v : map) mm = std::max(mm, v);
  for (double v : ru) mr = std::max(mr, v);
  std::vector<double> s(map.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = (mm > 0 ? map[i] / mm : 0.0) + (mr > 0 ? ru[i] / mr : 0.0);
  }
  return s;
}

inline std::size_t brute_argmax(const std::vector<double>& s) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    bool all_le = true;
    for (std::size_t j = 0; j < s.size(); ++j) all_le = all_le && s[j] <= s[i];
    bool earlier_max = false;
    for (std::size_t j = 0; j < i; ++j) {
      bool j_max = true;
      for (std::size_t k = 0; k < s.size(); ++k) j_max = j_max && s[k] <= s[j];
      earlier_max = earlier_max || j_max;
    }
    if (all_le && !earlier_max) best = i;
  }
  return best;
}

}  // namespace oracle
