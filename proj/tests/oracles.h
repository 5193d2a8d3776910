// Copyright 2026 The Brightsynth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// Independent reference implementations used as test oracles. They favor
// obviously-correct brute force over speed and share no code with the
// library beyond plain data types.

#ifndef BRIGHTSYNTH_TESTS_ORACLES_H_
#define BRIGHTSYNTH_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "brightsynth/image.h"
#include "brightsynth/nn/params.h"

namespace brightsynth::oracle {

// IoU of integer-aligned boxes by counting unit cells.
inline double PixelIou(const BBox& a, const BBox& b) {
  const int x0 = static_cast<int>(std::floor(std::min(a.x, b.x)));
  const int y0 = static_cast<int>(std::floor(std::min(a.y, b.y)));
  const int x1 = static_cast<int>(std::ceil(std::max(a.x + a.w, b.x + b.w)));
  const int y1 = static_cast<int>(std::ceil(std::max(a.y + a.h, b.y + b.h)));
  auto inside = [](const BBox& r, int x, int y) {
    return x >= r.x && x + 1 <= r.x + r.w && y >= r.y && y + 1 <= r.y + r.h;
  };
  long inter = 0;
  long uni = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const bool ia = inside(a, x, y);
      const bool ib = inside(b, x, y);
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// AP from first principles: for every recall level r on the 101-point grid,
// the best precision among all ranked prefixes whose recall reaches r.
inline double BruteForceAp(const std::vector<bool>& flags, int total_gt) {
  if (total_gt == 0) return flags.empty() ? 1.0 : 0.0;
  double sum = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    double best = 0.0;
    for (size_t n = 1; n <= flags.size(); ++n) {
      int tp = 0;
      for (size_t i = 0; i < n; ++i) tp += flags[i];
      const double recall = static_cast<double>(tp) / total_gt;
      const double precision = static_cast<double>(tp) / static_cast<double>(n);
      if (recall >= r) best = std::max(best, precision);
    }
    sum += best;
  }
  return sum / 101.0;
}

struct BruteForceResult {
  std::vector<double> ap;
  double map50 = 0.0;
  double map75 = 0.0;
  double map5095 = 0.0;
};

// Global ranking by (score desc, x, y, image id, input position); each
// prediction claims the best still-free ground truth of its own image.
inline BruteForceResult BruteForceMap(
    const std::map<std::string, std::vector<BBox>>& preds,
    const std::map<std::string, std::vector<BBox>>& gts) {
  struct Entry {
    double score, x, y;
    std::string id;
    size_t pos;
  };
  std::vector<Entry> ranked;
  int total_gt = 0;
  for (const auto& [id, boxes] : preds) {
    for (size_t i = 0; i < boxes.size(); ++i) {
      ranked.push_back({boxes[i].score.value_or(0.0), boxes[i].x, boxes[i].y, id, i});
    }
  }
  for (const auto& [id, boxes] : gts) total_gt += static_cast<int>(boxes.size());
  std::sort(ranked.begin(), ranked.end(), [](const Entry& a, const Entry& b) {
    return std::tie(b.score, a.x, a.y, a.id, a.pos) < std::tie(a.score, b.x, b.y, b.id, b.pos);
  });
  const double thresholds[10] = {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
  BruteForceResult out;
  for (double t : thresholds) {
    std::map<std::string, std::vector<bool>> taken;
    for (const auto& [id, boxes] : gts) taken[id].assign(boxes.size(), false);
    std::vector<bool> flags;
    for (const Entry& e : ranked) {
      const BBox& p = preds.at(e.id)[e.pos];
      const auto& g = gts.at(e.id);
      int best = -1;
      double best_iou = -1.0;
      for (size_t j = 0; j < g.size(); ++j) {
        if (taken[e.id][j]) continue;
        const double v = PixelIou(p, g[j]);
        if (v >= t && v > best_iou) {
          best = static_cast<int>(j);
          best_iou = v;
        }
      }
      if (best >= 0) taken[e.id][static_cast<size_t>(best)] = true;
      flags.push_back(best >= 0);
    }
    out.ap.push_back(BruteForceAp(flags, total_gt));
  }
  out.map50 = out.ap[0];
  out.map75 = out.ap[5];
  double s = 0.0;
  for (double v : out.ap) s += v;
  out.map5095 = s / 10.0;
  return out;
}

// Central differences of a scalar function of every entry of `params`.
inline nn::ParamSet NumericGrad(nn::ParamSet& params,
                                const std::function<double()>& loss, double h) {
  nn::ParamSet g = params.ZerosLike();
  for (size_t e = 0; e < params.entries().size(); ++e) {
    auto& t = params.entries()[e].second;
    auto& gt = g.entries()[e].second;
    for (size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + h;
      const double up = loss();
      t[i] = saved - h;
      const double down = loss();
      t[i] = saved;
      gt[i] = (up - down) / (2.0 * h);
    }
  }
  return g;
}

// |a - n| / max(|a|, |n|, floor); the floor keeps near-zero entries from
// turning rounding noise into large relative errors.
inline double RelativeError(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

}  // namespace brightsynth::oracle

#endif  // BRIGHTSYNTH_TESTS_ORACLES_H_
