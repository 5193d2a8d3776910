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
#ifndef BRIGHTSYNTH_DENOISER_TRAIN_H_
#define BRIGHTSYNTH_DENOISER_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "brightsynth/diffusion.h"
#include "brightsynth/image.h"
#include "brightsynth/log.h"
#include "brightsynth/nn/optim.h"
#include "brightsynth/nn/params.h"
#include "brightsynth/unet.h"

namespace brightsynth {

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 0.01;
  int batch_size = 4;
  int epochs = 50;
  double ema_decay = 0.9999;
  // Cap the EMA decay by (1 + step) / (10 + step) early in training.
  bool ema_warmup = true;
  int fid_every_epochs = 10;
  // Sample set drawn from the EMA weights at each FID evaluation.
  int fid_samples = 64;
  SamplerConfig fid_sampler{SamplerKind::kDdim, 20, 0.0, Spacing::kTrailing, true};
  uint64_t seed = 1;

  void Validate() const;
};

struct TrainBatch {
  nn::Tensor x0;
  nn::Tensor noise;
  std::vector<int> t;
};

struct GradResult {
  double loss = 0.0;
  nn::ParamSet grads;
};

// Mean squared error between the U-Net's epsilon estimate on
// ForwardNoise(x0, t, noise) and noise, and its parameter gradients, both
// multiplied by loss_scale.
GradResult DenoiserGrad(const nn::ParamSet& params, const UNetConfig& unet,
                        const TrainBatch& batch, const NoiseSchedule& schedule,
                        double loss_scale = 1.0);

struct DenoiserCheckpoint {
  int epoch = 0;
  UNetConfig unet;
  nn::ParamSet params;
  nn::ParamSet ema;
  std::vector<std::pair<std::string, std::string>> meta;
};

void SaveDenoiserCheckpoint(const std::filesystem::path& path,
                            const DenoiserCheckpoint& ckpt);
DenoiserCheckpoint LoadDenoiserCheckpoint(const std::filesystem::path& path);

struct FidPoint {
  int epoch = 0;
  double fid = 0.0;
};

struct TrainResult {
  // Written checkpoint files: index 0 is the initial one, then one per FID
  // evaluation, aligned with fid_curve[i - 1].
  std::vector<std::filesystem::path> checkpoints;
  std::vector<int> checkpoint_epochs;
  double initial_fid = 0.0;
  std::vector<FidPoint> fid_curve;
  std::vector<double> loss_curve;  // one entry per optimizer step
  nn::ParamSet params;
  nn::ParamSet ema;
};

// Trains on equally sized images. With an empty out_dir no files are written
// and `checkpoints` stays empty. An empty fid_reference disables FID.
TrainResult TrainDenoiser(
    const std::vector<Image>& dataset, const UNetConfig& unet,
    const TrainConfig& config, const std::vector<Image>& fid_reference,
    const std::filesystem::path& out_dir, const NoiseSchedule& schedule,
    const std::vector<std::pair<std::string, std::string>>& extra_meta = {},
    const LogFn& log = nullptr);

// Draws `count` images from a denoiser in batches.
std::vector<Image> GenerateImages(const Denoiser& denoiser,
                                  const SamplerConfig& sampler,
                                  const NoiseSchedule& schedule, int side,
                                  int count, uint64_t seed, int batch = 16);

// Index of the minimum FID; ties go to the later entry.
size_t SelectModel(const std::vector<double>& fid_curve);

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_DENOISER_TRAIN_H_
