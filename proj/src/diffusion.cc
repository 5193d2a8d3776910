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
#include "brightsynth/diffusion.h"

#include <algorithm>
#include <cmath>

#include "brightsynth/errors.h"
#include "brightsynth/rng.h"

namespace brightsynth {

using nn::Shape;
using nn::Tensor;

NoiseSchedule MakeSchedule(int num_steps, double beta_start, double beta_end) {
  if (num_steps < 1) throw ConfigError("schedule needs T >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw ConfigError("schedule needs 0 < beta_start <= beta_end < 1");
  }
  NoiseSchedule s;
  s.num_steps = num_steps;
  double running = 1.0;
  for (int t = 0; t < num_steps; ++t) {
    const double frac = num_steps == 1 ? 0.0 : static_cast<double>(t) / (num_steps - 1);
    const double beta = beta_start + (beta_end - beta_start) * frac;
    s.betas.push_back(beta);
    s.alphas.push_back(1.0 - beta);
    running *= 1.0 - beta;
    s.alpha_bars.push_back(running);
  }
  return s;
}

Tensor ForwardNoise(const Tensor& x0, double alpha_bar, const Tensor& noise) {
  nn::CheckSameShape(x0, noise, "forward noise");
  const double a = std::sqrt(alpha_bar);
  const double b = std::sqrt(1.0 - alpha_bar);
  Tensor out(x0.shape);
  for (size_t k = 0; k < out.size(); ++k) out.data[k] = a * x0.data[k] + b * noise.data[k];
  return out;
}

Tensor ForwardNoise(const Tensor& x0, int t, const Tensor& noise,
                    const NoiseSchedule& schedule) {
  if (t < 0 || t >= schedule.num_steps) throw ConfigError("timestep out of range");
  return ForwardNoise(x0, schedule.alpha_bars[t], noise);
}

Spacing ParseSpacing(std::string_view text) {
  if (text == "trailing") return Spacing::kTrailing;
  if (text == "leading") return Spacing::kLeading;
  if (text == "linspace") return Spacing::kLinspace;
  throw ConfigError("unknown timestep spacing '" + std::string(text) + "'");
}

SamplerKind ParseSamplerKind(std::string_view text) {
  if (text == "ddim") return SamplerKind::kDdim;
  if (text == "euler_ancestral") return SamplerKind::kEulerAncestral;
  throw ConfigError("unknown sampler '" + std::string(text) + "'");
}

std::string_view ToString(Spacing spacing) {
  switch (spacing) {
    case Spacing::kLeading:
      return "leading";
    case Spacing::kLinspace:
      return "linspace";
    case Spacing::kTrailing:
      break;
  }
  return "trailing";
}

std::string_view ToString(SamplerKind kind) {
  return kind == SamplerKind::kDdim ? "ddim" : "euler_ancestral";
}

std::vector<int> TimestepSpacing(int num_train_steps, int steps, Spacing mode) {
  if (steps < 1 || steps > num_train_steps) {
    throw ConfigError("inference steps must lie in [1, T]");
  }
  const double T = num_train_steps;
  std::vector<int> ts;
  switch (mode) {
    case Spacing::kTrailing:
      for (int k = 0; k < steps; ++k) {
        // Round half to even, like numpy.
        ts.push_back(static_cast<int>(std::nearbyint(T - k * T / steps)) - 1);
      }
      break;
    case Spacing::kLinspace:
      for (int k = 0; k < steps; ++k) {
        const double v = steps == 1 ? 0.0 : (T - 1) * k / (steps - 1);
        ts.push_back(static_cast<int>(std::nearbyint(v)));
      }
      std::reverse(ts.begin(), ts.end());
      break;
    case Spacing::kLeading:
      for (int k = 0; k < steps; ++k) {
        ts.push_back(static_cast<int>(std::floor(k * T / steps)));
      }
      std::reverse(ts.begin(), ts.end());
      break;
  }
  for (int& t : ts) t = std::clamp(t, 0, num_train_steps - 1);
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

void SamplerConfig::Validate(int num_train_steps) const {
  if (steps < 1 || steps > num_train_steps) {
    throw ConfigError("sampler steps must lie in [1, T]");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("eta must lie in [0,1]");
}

double SigmaFromAlphaBar(double alpha_bar) {
  return std::sqrt((1.0 - alpha_bar) / alpha_bar);
}

Tensor DdimStep(const Tensor& x_t, const Tensor& eps_hat, double ab_t,
                double ab_prev, double eta, const Tensor* z) {
  nn::CheckSameShape(x_t, eps_hat, "ddim step");
  if (!(ab_t > 0.0)) throw NumericError("DDIM step with alpha_bar = 0");
  double sigma = 0.0;
  if (eta > 0.0) {
    sigma = eta * std::sqrt((1.0 - ab_prev) / (1.0 - ab_t)) *
            std::sqrt(1.0 - ab_t / ab_prev);
    if (z == nullptr) throw ConfigError("DDIM with eta > 0 needs noise");
    nn::CheckSameShape(x_t, *z, "ddim noise");
  }
  const double sa = std::sqrt(ab_t);
  const double sb = std::sqrt(1.0 - ab_t);
  const double sp = std::sqrt(ab_prev);
  const double dir = std::sqrt(std::max(0.0, 1.0 - ab_prev - sigma * sigma));
  Tensor out(x_t.shape);
  for (size_t k = 0; k < out.size(); ++k) {
    const double x0_hat = (x_t.data[k] - sb * eps_hat.data[k]) / sa;
    double v = sp * x0_hat + dir * eps_hat.data[k];
    if (sigma > 0.0) v += sigma * z->data[k];
    out.data[k] = v;
  }
  return out;
}

Tensor DdimStep(const Tensor& x_t, const Tensor& eps_hat, int t, int t_prev,
                double eta, const NoiseSchedule& schedule, const Tensor* z) {
  if (t < 0 || t >= schedule.num_steps || t_prev >= schedule.num_steps) {
    throw ConfigError("DDIM timestep out of range");
  }
  const double ab_prev = t_prev < 0 ? 1.0 : schedule.alpha_bars[t_prev];
  return DdimStep(x_t, eps_hat, schedule.alpha_bars[t], ab_prev, eta, z);
}

Tensor EulerAncestralStep(const Tensor& x, const Tensor& denoised, double sigma,
                          double sigma_next, const Tensor& z) {
  nn::CheckSameShape(x, denoised, "euler ancestral step");
  if (!(sigma > 0.0)) throw ConfigError("Euler Ancestral needs sigma > 0");
  if (sigma_next < 0.0 || sigma_next > sigma) {
    throw ConfigError("Euler Ancestral needs 0 <= sigma_next <= sigma");
  }
  double sigma_up = 0.0;
  if (sigma_next > 0.0) {
    sigma_up = std::sqrt(sigma_next * sigma_next *
                         (sigma * sigma - sigma_next * sigma_next) / (sigma * sigma));
    nn::CheckSameShape(x, z, "euler ancestral noise");
  }
  const double sigma_down =
      std::sqrt(std::max(0.0, sigma_next * sigma_next - sigma_up * sigma_up));
  Tensor out(x.shape);
  for (size_t k = 0; k < out.size(); ++k) {
    const double d = (x.data[k] - denoised.data[k]) / sigma;
    double v = x.data[k] + d * (sigma_down - sigma);
    if (sigma_up > 0.0) v += sigma_up * z.data[k];
    out.data[k] = v;
  }
  return out;
}

namespace {

// One normal draw per element, each batch element from its own stream.
Tensor DrawNoise(std::vector<Rng>& streams, Shape shape) {
  Tensor z(shape);
  const size_t per = z.size() / std::max<size_t>(1, streams.size());
  for (size_t i = 0; i < streams.size(); ++i) {
    for (size_t k = 0; k < per; ++k) z.data[i * per + k] = streams[i].Normal();
  }
  return z;
}

}  // namespace

Tensor Sample(const Denoiser& denoiser, const SamplerConfig& config,
              const NoiseSchedule& schedule, Shape shape, uint64_t seed) {
  config.Validate(schedule.num_steps);
  std::vector<Rng> streams;
  for (int i = 0; i < shape.n; ++i) {
    streams.emplace_back(DeriveSeed(seed, static_cast<uint64_t>(i)));
  }
  const std::vector<int> ts =
      TimestepSpacing(schedule.num_steps, config.steps, config.spacing);
  Tensor x = DrawNoise(streams, shape);

  if (config.kind == SamplerKind::kDdim) {
    for (size_t i = 0; i < ts.size(); ++i) {
      const int t = ts[i];
      const int t_prev = i + 1 < ts.size() ? ts[i + 1] : -1;
      const Tensor eps = denoiser.PredictEpsilon(x, std::vector<int>(shape.n, t));
      if (config.eta > 0.0) {
        const Tensor z = DrawNoise(streams, shape);
        x = DdimStep(x, eps, t, t_prev, config.eta, schedule, &z);
      } else {
        x = DdimStep(x, eps, t, t_prev, 0.0, schedule);
      }
    }
  } else {
    std::vector<double> sigmas;
    for (int t : ts) sigmas.push_back(SigmaFromAlphaBar(schedule.alpha_bars[t]));
    sigmas.push_back(0.0);
    // Sigma-space state starts at the terminal marginal's scale.
    const double init_scale = std::sqrt(sigmas[0] * sigmas[0] + 1.0);
    for (double& v : x.data) v *= init_scale;
    for (size_t i = 0; i < ts.size(); ++i) {
      const double sigma = sigmas[i];
      const double input_scale = 1.0 / std::sqrt(sigma * sigma + 1.0);
      Tensor model_in = x;
      for (double& v : model_in.data) v *= input_scale;
      const Tensor eps = denoiser.PredictEpsilon(model_in, std::vector<int>(shape.n, ts[i]));
      Tensor denoised(x.shape);
      for (size_t k = 0; k < x.size(); ++k) denoised.data[k] = x.data[k] - sigma * eps.data[k];
      const Tensor z = sigmas[i + 1] > 0.0 ? DrawNoise(streams, shape) : Tensor(shape);
      x = EulerAncestralStep(x, denoised, sigma, sigmas[i + 1], z);
    }
  }
  if (config.clamp_output) {
    for (double& v : x.data) v = std::clamp(v, 0.0, 1.0);
  }
  return x;
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(double mu, double sigma0,
                                                   NoiseSchedule schedule)
    : mu_(mu), sigma0_(sigma0), schedule_(std::move(schedule)) {
  if (!(sigma0 > 0.0)) throw ConfigError("prior sigma0 must be > 0");
}

double AnalyticGaussianDenoiser::PosteriorMean(double x_t, double ab) const {
  const double s2 = sigma0_ * sigma0_;
  return (std::sqrt(ab) * s2 * x_t + (1.0 - ab) * mu_) / (ab * s2 + (1.0 - ab));
}

Tensor AnalyticGaussianDenoiser::PredictEpsilon(const Tensor& x_t,
                                                const std::vector<int>& t) const {
  if (t.size() != static_cast<size_t>(x_t.shape.n)) {
    throw ShapeError("one timestep per batch element required");
  }
  Tensor eps(x_t.shape);
  const size_t per = x_t.size() / std::max(1, x_t.shape.n);
  for (int i = 0; i < x_t.shape.n; ++i) {
    const double ab = schedule_.alpha_bars.at(static_cast<size_t>(t[i]));
    const double sa = std::sqrt(ab);
    const double sb = std::sqrt(1.0 - ab);
    for (size_t k = i * per; k < (i + 1) * per; ++k) {
      eps.data[k] = (x_t.data[k] - sa * PosteriorMean(x_t.data[k], ab)) / sb;
    }
  }
  return eps;
}

}  // namespace brightsynth
