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
#ifndef BRIGHTSYNTH_UNET_H_
#define BRIGHTSYNTH_UNET_H_

// Small convolutional U-Net epsilon predictor.
//
// Each level holds one residual block (per-channel scale-shift, SiLU, 3x3
// conv, timestep injection, scale-shift, SiLU, 3x3 conv) followed by a
// stride-2 conv on the way down. The decoder mirrors it with nearest
// upsampling and skip concatenation. The output conv starts at zero.

#include <cstdint>
#include <vector>

#include "brightsynth/diffusion.h"
#include "brightsynth/nn/params.h"
#include "brightsynth/nn/tape.h"

namespace brightsynth {

struct UNetConfig {
  std::vector<int> block_channels{16, 32, 64};
  int time_embed_dim = 64;
  bool attention = false;

  int levels() const { return static_cast<int>(block_channels.size()); }
  void Validate() const;
};

nn::ParamSet InitUNet(const UNetConfig& config, uint64_t seed);

// [N, dim, 1, 1] sinusoidal embedding of integer timesteps.
nn::Tensor TimestepEmbedding(const std::vector<int>& t, int dim);

// Records the forward pass on `tape`. `params` must outlive the tape.
nn::Var UNetForward(nn::Tape& tape, const nn::ParamSet& params,
                    const UNetConfig& config, nn::Var x,
                    const std::vector<int>& t);

nn::Tensor UNetPredict(const nn::ParamSet& params, const UNetConfig& config,
                       const nn::Tensor& x, const std::vector<int>& t);

class UNetDenoiser : public Denoiser {
 public:
  UNetDenoiser(const nn::ParamSet& params, UNetConfig config)
      : params_(params), config_(std::move(config)) {}

  nn::Tensor PredictEpsilon(const nn::Tensor& x_t,
                            const std::vector<int>& t) const override {
    return UNetPredict(params_, config_, x_t, t);
  }

 private:
  const nn::ParamSet& params_;
  UNetConfig config_;
};

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_UNET_H_
