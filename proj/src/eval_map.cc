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
#include "brightsynth/eval_map.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <tuple>

#include "brightsynth/errors.h"

namespace brightsynth {

double Iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

std::vector<size_t> ConfidenceOrder(const std::vector<BBox>& preds) {
  std::vector<size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    const double si = preds[i].score.value_or(0.0);
    const double sj = preds[j].score.value_or(0.0);
    if (si != sj) return si > sj;
    if (preds[i].x != preds[j].x) return preds[i].x < preds[j].x;
    return preds[i].y < preds[j].y;
  });
  return order;
}

MatchResult MatchDetections(const std::vector<BBox>& preds,
                            const std::vector<BBox>& gts, double iou_thresh) {
  MatchResult result;
  result.order = ConfidenceOrder(preds);
  std::vector<bool> taken(gts.size(), false);
  for (size_t idx : result.order) {
    int best = -1;
    double best_iou = iou_thresh;
    for (size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = Iou(preds[idx], gts[g]);
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) taken[static_cast<size_t>(best)] = true;
    result.tp.push_back(best >= 0);
    result.matched_gt.push_back(best);
  }
  result.unmatched_gt =
      static_cast<int>(std::count(taken.begin(), taken.end(), false));
  return result;
}

namespace {

std::vector<PrPoint> PrCurve(const std::vector<bool>& flags, int total_gt) {
  std::vector<PrPoint> curve;
  curve.reserve(flags.size());
  int tp = 0;
  int fp = 0;
  for (bool f : flags) {
    f ? ++tp : ++fp;
    curve.push_back({total_gt > 0 ? static_cast<double>(tp) / total_gt : 0.0,
                     static_cast<double>(tp) / (tp + fp)});
  }
  return curve;
}

double InterpolatedAp(const std::vector<PrPoint>& curve) {
  // Precision envelope: max precision at any point at or after i.
  std::vector<double> envelope(curve.size());
  double running = 0.0;
  for (size_t i = curve.size(); i-- > 0;) {
    running = std::max(running, curve[i].precision);
    envelope[i] = running;
  }
  double sum = 0.0;
  size_t pos = 0;
  for (int k = 0; k <= 100; ++k) {
    const double r = k / 100.0;
    while (pos < curve.size() && curve[pos].recall < r) ++pos;
    sum += pos < curve.size() ? envelope[pos] : 0.0;
  }
  return sum / 101.0;
}

}  // namespace

double AveragePrecision(const std::vector<bool>& flags, int total_gt) {
  if (total_gt < 0) throw InputError("total_gt must be >= 0");
  if (total_gt == 0) return flags.empty() ? 1.0 : 0.0;
  return InterpolatedAp(PrCurve(flags, total_gt));
}

std::vector<double> CocoIouThresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

EvalResult MapSuite(const BoxesById& predictions,
                    const BoxesById& ground_truth) {
  if (predictions.size() != ground_truth.size() ||
      !std::equal(predictions.begin(), predictions.end(), ground_truth.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw InputError("prediction and ground-truth image id sets differ");
  }
  EvalResult result;
  result.thresholds = CocoIouThresholds();
  for (double thresh : result.thresholds) {
    // (score, x, y, image id, in-image rank, tp)
    std::vector<std::tuple<double, double, double, std::string, size_t, bool>> all;
    int total_gt = 0;
    for (const auto& [id, preds] : predictions) {
      const auto& gts = ground_truth.at(id);
      total_gt += static_cast<int>(gts.size());
      const MatchResult m = MatchDetections(preds, gts, thresh);
      for (size_t k = 0; k < m.order.size(); ++k) {
        const BBox& p = preds[m.order[k]];
        all.emplace_back(p.score.value_or(0.0), p.x, p.y, id, k, m.tp[k]);
      }
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
      if (std::get<2>(a) != std::get<2>(b)) return std::get<2>(a) < std::get<2>(b);
      if (std::get<3>(a) != std::get<3>(b)) return std::get<3>(a) < std::get<3>(b);
      return std::get<4>(a) < std::get<4>(b);
    });
    std::vector<bool> flags;
    flags.reserve(all.size());
    for (const auto& e : all) flags.push_back(std::get<5>(e));
    result.ap.push_back(AveragePrecision(flags, total_gt));
    result.curves.push_back(PrCurve(flags, total_gt));
  }
  result.map50 = result.ap[0];
  result.map75 = result.ap[5];
  double sum = 0.0;
  for (double v : result.ap) sum += v;
  result.map5095 = sum / static_cast<double>(result.ap.size());
  return result;
}

std::string FormatMetricsTable(
    const std::vector<std::pair<std::string, EvalResult>>& rows) {
  size_t name_width = 7;
  for (const auto& [name, r] : rows) name_width = std::max(name_width, name.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-*s  %8s  %8s  %9s\n",
                static_cast<int>(name_width), "Dataset", "mAP@50", "mAP@75",
                "mAP@50:95");
  out << line;
  out << std::string(name_width + 33, '-') << "\n";
  for (const auto& [name, r] : rows) {
    std::snprintf(line, sizeof(line), "%-*s  %8.4f  %8.4f  %9.4f\n",
                  static_cast<int>(name_width), name.c_str(), r.map50, r.map75,
                  r.map5095);
    out << line;
  }
  return out.str();
}

std::string FormatMetricsCsv(
    const std::vector<std::pair<std::string, EvalResult>>& rows) {
  std::ostringstream out;
  out << "dataset,map50,map75,map5095\n";
  char line[256];
  for (const auto& [name, r] : rows) {
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f\n", name.c_str(),
                  r.map50, r.map75, r.map5095);
    out << line;
  }
  return out.str();
}

}  // namespace brightsynth
