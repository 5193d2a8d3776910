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
#ifndef BRIGHTSYNTH_DIFFUSION_H_
#define BRIGHTSYNTH_DIFFUSION_H_

// Noise schedules, forward noising and the DDIM / Euler Ancestral reverse
// samplers for epsilon-predicting denoisers.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "brightsynth/nn/tensor.h"

namespace brightsynth {

struct NoiseSchedule {
  int num_steps = 0;  // T
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<double> alpha_bars;
};

inline constexpr int kDefaultTrainSteps = 1000;
inline constexpr double kDefaultBetaStart = 1e-4;
inline constexpr double kDefaultBetaEnd = 0.02;

// Linear betas from beta_start to beta_end inclusive.
NoiseSchedule MakeSchedule(int num_steps = kDefaultTrainSteps,
                           double beta_start = kDefaultBetaStart,
                           double beta_end = kDefaultBetaEnd);

// sqrt(ab) * x0 + sqrt(1 - ab) * noise
nn::Tensor ForwardNoise(const nn::Tensor& x0, double alpha_bar,
                        const nn::Tensor& noise);
nn::Tensor ForwardNoise(const nn::Tensor& x0, int t, const nn::Tensor& noise,
                        const NoiseSchedule& schedule);

enum class Spacing { kTrailing, kLeading, kLinspace };
enum class SamplerKind { kDdim, kEulerAncestral };

Spacing ParseSpacing(std::string_view text);
SamplerKind ParseSamplerKind(std::string_view text);
std::string_view ToString(Spacing spacing);
std::string_view ToString(SamplerKind kind);

// Strictly descending inference timesteps in [0, T-1].
std::vector<int> TimestepSpacing(int num_train_steps, int steps, Spacing mode);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kEulerAncestral;
  int steps = 40;
  double eta = 0.0;  // DDIM only
  Spacing spacing = Spacing::kTrailing;
  // Final [0,1] clamp (matches 8-bit export). Disabled only to inspect raw
  // sampler output.
  bool clamp_output = true;

  void Validate(int num_train_steps) const;
};

// Epsilon-prediction contract: same-shape output, deterministic.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  // `t` has one timestep per batch element.
  virtual nn::Tensor PredictEpsilon(const nn::Tensor& x_t,
                                    const std::vector<int>& t) const = 0;
};

// One DDIM update from alpha-bar `ab_t` to `ab_prev` (1 for the final step).
// `z` is required when eta > 0 and ignored otherwise.
nn::Tensor DdimStep(const nn::Tensor& x_t, const nn::Tensor& eps_hat,
                    double ab_t, double ab_prev, double eta,
                    const nn::Tensor* z = nullptr);
// t_prev < 0 denotes the final step to data.
nn::Tensor DdimStep(const nn::Tensor& x_t, const nn::Tensor& eps_hat, int t,
                    int t_prev, double eta, const NoiseSchedule& schedule,
                    const nn::Tensor* z = nullptr);

// Ancestral Euler step in sigma space, x = x_t / sqrt(ab_t).
nn::Tensor EulerAncestralStep(const nn::Tensor& x, const nn::Tensor& denoised,
                              double sigma, double sigma_next,
                              const nn::Tensor& z);

// sqrt((1 - ab_t) / ab_t)
double SigmaFromAlphaBar(double alpha_bar);

// Draws from the reverse process starting at standard normal noise. Batch
// element i owns the random stream DeriveSeed(seed, i).
nn::Tensor Sample(const Denoiser& denoiser, const SamplerConfig& config,
                  const NoiseSchedule& schedule, nn::Shape shape, uint64_t seed);

// Exact posterior-mean denoiser for an i.i.d. per-pixel N(mu, sigma0^2)
// prior.
class AnalyticGaussianDenoiser : public Denoiser {
 public:
  AnalyticGaussianDenoiser(double mu, double sigma0, NoiseSchedule schedule);

  // E[x0 | x_t] for alpha-bar `ab`.
  double PosteriorMean(double x_t, double ab) const;
  nn::Tensor PredictEpsilon(const nn::Tensor& x_t,
                            const std::vector<int>& t) const override;

 private:
  double mu_;
  double sigma0_;
  NoiseSchedule schedule_;
};

}  // namespace brightsynth

#endif  // BRIGHTSYNTH_DIFFUSION_H_
