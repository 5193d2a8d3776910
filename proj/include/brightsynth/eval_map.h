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
#ifndef BRIGHTSYNTH_EVAL_MAP_H_
#define BRIGHTSYNTH_EVAL_MAP_H_

// COCO-style single-class detection metrics: greedy confidence-ordered
// matching and 101-point interpolated average precision.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "brightsynth/image.h"

namespace brightsynth {

double Iou(const BBox& a, const BBox& b);

// Processing order for predictions: descending score, then ascending x,
// then ascending y, then input position.
std::vector<size_t> ConfidenceOrder(const std::vector<BBox>& preds);

struct MatchResult {
  std::vector<size_t> order;  // prediction indices in processing order
  std::vector<bool> tp;       // per processed prediction
  std::vector<int> matched_gt;  // gt index or -1, per processed prediction
  int unmatched_gt = 0;
};

MatchResult MatchDetections(const std::vector<BBox>& preds,
                            const std::vector<BBox>& gts, double iou_thresh);

// `flags` must already be ordered by descending confidence.
double AveragePrecision(const std::vector<bool>& flags, int total_gt);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct EvalResult {
  double map50 = 0.0;
  double map75 = 0.0;
  double map5095 = 0.0;
  std::vector<double> thresholds;  // 0.50, 0.55, ..., 0.95
  std::vector<double> ap;          // per threshold
  std::vector<std::vector<PrPoint>> curves;  // per threshold
};

using BoxesById = std::map<std::string, std::vector<BBox>>;

// Throws InputError if the two maps do not cover the same image ids.
EvalResult MapSuite(const BoxesById& predictions, const BoxesById& ground_truth);

std::vector<double> CocoIouThresholds();

// Table rows are (dataset name, result); values at 4 decimals.
std::string FormatMetricsTable(
    const std::vector<std::pair<std::string, EvalResult>>& rows);
std::string FormatMetricsCsv(
    const std::vector<std::pair<std::string, EvalResult>>& rows);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_EVAL_MAP_H_
