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
#include "brightsynth/nn/optim.h"

#include <algorithm>
#include <cmath>

#include "brightsynth/errors.h"

namespace brightsynth::nn {

OptState InitOptState(const ParamSet& params) {
  return OptState{params.ZerosLike(), params.ZerosLike(), 0};
}

void AdamWStep(ParamSet& params, const ParamSet& grads, OptState& state,
               const AdamWConfig& config) {
  if (!params.SameLayout(grads) || !params.SameLayout(state.m) ||
      !params.SameLayout(state.v)) {
    throw ShapeError("AdamW: parameter, gradient and state layouts differ");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  auto& p_entries = params.entries();
  auto& m_entries = state.m.entries();
  auto& v_entries = state.v.entries();
  const auto& g_entries = grads.entries();
  for (size_t i = 0; i < p_entries.size(); ++i) {
    auto& p = p_entries[i].second.data;
    auto& m = m_entries[i].second.data;
    auto& v = v_entries[i].second.data;
    const auto& g = g_entries[i].second.data;
    for (size_t k = 0; k < p.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p[k] = p[k] - config.lr * (m_hat / (std::sqrt(v_hat) + config.eps)) -
             config.lr * config.weight_decay * p[k];
    }
  }
}

void EmaUpdate(ParamSet& ema, const ParamSet& params, double decay) {
  if (!ema.SameLayout(params)) throw ShapeError("EMA layout differs from params");
  auto& e_entries = ema.entries();
  const auto& p_entries = params.entries();
  for (size_t i = 0; i < e_entries.size(); ++i) {
    auto& e = e_entries[i].second.data;
    const auto& p = p_entries[i].second.data;
    for (size_t k = 0; k < e.size(); ++k) e[k] = decay * e[k] + (1.0 - decay) * p[k];
  }
}

double EmaWarmupDecay(double max_decay, int64_t step) {
  const double s = static_cast<double>(std::max<int64_t>(step, 0));
  return std::min(max_decay, (1.0 + s) / (10.0 + s));
}

}  // namespace brightsynth::nn
