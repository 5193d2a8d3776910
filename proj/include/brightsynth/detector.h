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
#ifndef BRIGHTSYNTH_DETECTOR_H_
#define BRIGHTSYNTH_DETECTOR_H_

// Center-heatmap cell detector and a difference-of-Gaussians blob baseline.
//
// The network downsamples by `stride` with strided 3x3 convs and predicts,
// per output cell, a center logit, the box size (in stride units) and the
// sub-cell center offset.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "brightsynth/eval_map.h"
#include "brightsynth/image.h"
#include "brightsynth/log.h"
#include "brightsynth/manifest.h"
#include "brightsynth/nn/params.h"
#include "brightsynth/nn/tape.h"

namespace brightsynth {

struct AugmentFlags {
  bool hflip = true;
  bool vflip = true;
  bool intensity_jitter = true;
  bool mosaic = true;
  bool mixup = false;  // reserved; enabling it is a ConfigError
};

struct DetectorConfig {
  int stride = 4;
  // One entry per resolution: the stem, then one per 2x downsampling, so
  // the length is log2(stride) + 1.
  std::vector<int> channels{16, 32, 32};
  double conf_thresh = 0.3;
  double nms_iou = 0.5;
  // Confidence floor for predictions scored by mAP during validation.
  double eval_conf = 0.01;
  int epochs = 60;
  int patience = 35;
  int batch_size = 8;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  double size_weight = 0.1;
  double offset_weight = 1.0;
  double mosaic_prob = 0.5;
  AugmentFlags augment;

  // image_side > 0 additionally checks divisibility by the stride.
  void Validate(int image_side = 0) const;
};

struct DetectorModel {
  DetectorConfig config;
  nn::ParamSet params;
};

struct Prediction {
  std::vector<BBox> boxes;
};

struct HeatmapTargets {
  nn::Tensor heatmap;  // [1,1,gh,gw]
  nn::Tensor size;     // [1,2,gh,gw] (w, h) / stride at center cells
  nn::Tensor offset;   // [1,2,gh,gw] sub-cell center position in [0,1)
  nn::Tensor mask;     // [1,1,gh,gw] 1 at center cells
  int num_pos = 0;
};

// Gaussian splat with sigma = max(1, min(w,h) / (3 * stride)) at each box's
// center cell, max-combined.
HeatmapTargets EncodeTargets(const std::vector<BBox>& boxes, int width,
                             int height, int stride);

DetectorModel InitDetector(const DetectorConfig& config, uint64_t seed);

struct DetectorVars {
  nn::Var heat_logits;
  nn::Var size;
  nn::Var offset;
};

DetectorVars DetectorForward(nn::Tape& tape, const DetectorModel& model, nn::Var x);

// Turns one image's head outputs (n = 0 of each tensor) into boxes: 3x3
// local maxima of `heat` (probabilities) above conf_thresh, then NMS.
Prediction DecodeHeads(const nn::Tensor& heat, const nn::Tensor& size,
                       const nn::Tensor& offset, int stride, int width,
                       int height, double conf_thresh, double nms_iou);

Prediction Detect(const DetectorModel& model, const Image& image,
                  double conf_thresh, double nms_iou);

// Greedy non-maximum suppression in ConfidenceOrder; a box is dropped when
// its IoU with a kept box exceeds iou_thresh.
std::vector<BBox> Nms(const std::vector<BBox>& boxes, double iou_thresh);

struct DetectionSample {
  std::string id;
  Image image;
  std::vector<BBox> boxes;
};

std::vector<DetectionSample> LoadSamples(const DatasetManifest& manifest, Split split);

struct TrainingHistory {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_map50;   // per epoch
  std::vector<double> val_map5095;
  int best_epoch = 0;              // 0 = initial parameters
  int epochs_run = 0;
};

// Early-stops on validation mAP@50 (ties broken by mAP@50:95) and returns
// the best parameters seen.
// An empty validation set disables early stopping.
DetectorModel TrainDetector(const std::vector<DetectionSample>& train,
                            const std::vector<DetectionSample>& val,
                            const DetectorConfig& config, uint64_t seed,
                            TrainingHistory* history = nullptr,
                            const LogFn& log = nullptr);
DetectorModel TrainDetector(const DatasetManifest& manifest,
                            const DetectorConfig& config, uint64_t seed,
                            TrainingHistory* history = nullptr,
                            const LogFn& log = nullptr);

// Predictions keyed by sample id, for MapSuite.
BoxesById PredictAll(const DetectorModel& model,
                     const std::vector<DetectionSample>& samples, double conf_thresh);
BoxesById GroundTruth(const std::vector<DetectionSample>& samples);

void SaveDetector(const std::filesystem::path& path, const DetectorModel& model);
DetectorModel LoadDetector(const std::filesystem::path& path);

// Difference-of-Gaussians maxima over space and scale, computed on the
// absolute deviation from the median intensity so that dark rims and bright
// interiors add up. Each sigma s gives the band G(s) - G(1.6 s); peaks with response above `thresh` become boxes
// of side 2 sqrt(2) s scored by response / strongest response.
Prediction BlobBaseline(const Image& image, const std::vector<double>& sigmas,
                        double thresh, double nms_iou = 0.3);

Image GaussianBlur(const Image& image, double sigma);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_DETECTOR_H_
