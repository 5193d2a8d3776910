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
#ifndef BRIGHTSYNTH_NN_OPTIM_H_
#define BRIGHTSYNTH_NN_OPTIM_H_

#include <cstdint>

#include "brightsynth/nn/params.h"

namespace brightsynth::nn {

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct OptState {
  ParamSet m;
  ParamSet v;
  int64_t step = 0;
};

OptState InitOptState(const ParamSet& params);

// Bias-corrected Adam with decoupled weight decay:
//   theta -= lr * m_hat / (sqrt(v_hat) + eps) + lr * wd * theta
void AdamWStep(ParamSet& params, const ParamSet& grads, OptState& state,
               const AdamWConfig& config);

// ema = decay * ema + (1 - decay) * params
void EmaUpdate(ParamSet& ema, const ParamSet& params, double decay);

// Decay actually applied at optimizer step `step` (1-based): the configured
// decay capped by the warmup (1 + step) / (10 + step).
double EmaWarmupDecay(double max_decay, int64_t step);

}  // namespace brightsynth::nn

#endif  // BRIGHTSYNTH_NN_OPTIM_H_
