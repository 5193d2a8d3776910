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
#include "brightsynth/denoiser_train.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "brightsynth/errors.h"
#include "brightsynth/fid.h"
#include "brightsynth/nn/ops.h"
#include "brightsynth/nn/tape.h"
#include "brightsynth/rng.h"

namespace brightsynth {

namespace fs = std::filesystem;
using nn::ParamSet;
using nn::Tensor;

void TrainConfig::Validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (!(ema_decay >= 0.0 && ema_decay <= 1.0)) {
    throw ConfigError("ema_decay must lie in [0,1]");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (fid_every_epochs < 1) throw ConfigError("fid_every_epochs must be >= 1");
  if (fid_samples < 2) throw ConfigError("fid_samples must be >= 2");
}

GradResult DenoiserGrad(const ParamSet& params, const UNetConfig& unet,
                        const TrainBatch& batch, const NoiseSchedule& schedule,
                        double loss_scale) {
  nn::CheckSameShape(batch.x0, batch.noise, "denoiser batch");
  if (batch.x0.shape.n < 1) throw ConfigError("empty training batch");
  if (batch.t.size() != static_cast<size_t>(batch.x0.shape.n)) {
    throw ShapeError("one timestep per batch element required");
  }
  Tensor x_t(batch.x0.shape);
  const size_t per = batch.x0.size() / batch.x0.shape.n;
  for (int i = 0; i < batch.x0.shape.n; ++i) {
    const int t = batch.t[i];
    if (t < 0 || t >= schedule.num_steps) throw ConfigError("timestep out of range");
    const double a = std::sqrt(schedule.alpha_bars[t]);
    const double b = std::sqrt(1.0 - schedule.alpha_bars[t]);
    for (size_t k = i * per; k < (i + 1) * per; ++k) {
      x_t.data[k] = a * batch.x0.data[k] + b * batch.noise.data[k];
    }
  }
  nn::Tape tape;
  nn::Var in = tape.Constant(std::move(x_t));
  nn::Var eps = UNetForward(tape, params, unet, in, batch.t);
  nn::Var loss = nn::MseLoss(tape, eps, tape.Constant(batch.noise));
  if (loss_scale != 1.0) loss = nn::Scale(tape, loss, loss_scale);
  tape.Backward(loss);
  GradResult result;
  result.loss = tape.value(loss).data[0];
  result.grads = params.ZerosLike();
  tape.AccumulateParamGrads(result.grads);
  return result;
}

namespace {

constexpr char kParamsPrefix[] = "params/";
constexpr char kEmaPrefix[] = "ema/";

std::string JoinInts(const std::vector<int>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> SplitInts(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw InputError("bad integer list '" + text + "'");
    }
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::vector<Image> ToImages(const Tensor& batch) { return nn::BatchToImages(batch); }

}  // namespace

void SaveDenoiserCheckpoint(const fs::path& path, const DenoiserCheckpoint& ckpt) {
  nn::Checkpoint out;
  out.meta.emplace_back("kind", "denoiser");
  out.meta.emplace_back("epoch", std::to_string(ckpt.epoch));
  out.meta.emplace_back("block_channels", JoinInts(ckpt.unet.block_channels));
  out.meta.emplace_back("time_embed_dim", std::to_string(ckpt.unet.time_embed_dim));
  for (const auto& kv : ckpt.meta) out.meta.push_back(kv);
  for (const auto& [name, t] : ckpt.params.entries()) out.tensors.Add(kParamsPrefix + name, t);
  for (const auto& [name, t] : ckpt.ema.entries()) out.tensors.Add(kEmaPrefix + name, t);
  nn::WriteCheckpoint(path, out);
}

DenoiserCheckpoint LoadDenoiserCheckpoint(const fs::path& path) {
  nn::Checkpoint in = nn::ReadCheckpoint(path);
  if (in.Meta("kind") != "denoiser") {
    throw InputError(path.string() + " is not a denoiser checkpoint");
  }
  DenoiserCheckpoint ckpt;
  try {
    ckpt.epoch = std::stoi(in.Meta("epoch", "0"));
    ckpt.unet.time_embed_dim = std::stoi(in.Meta("time_embed_dim"));
  } catch (const std::exception&) {
    throw InputError(path.string() + ": bad checkpoint metadata");
  }
  ckpt.unet.block_channels = SplitInts(in.Meta("block_channels"));
  ckpt.unet.Validate();
  ckpt.meta = in.meta;
  ckpt.params = nn::StripPrefix(in.tensors, kParamsPrefix);
  ckpt.ema = nn::StripPrefix(in.tensors, kEmaPrefix);
  if (!ckpt.params.SameLayout(InitUNet(ckpt.unet, 0)) ||
      !ckpt.ema.SameLayout(ckpt.params)) {
    throw InputError(path.string() + ": tensors do not match the U-Net layout");
  }
  return ckpt;
}

std::vector<Image> GenerateImages(const Denoiser& denoiser,
                                  const SamplerConfig& sampler,
                                  const NoiseSchedule& schedule, int side,
                                  int count, uint64_t seed, int batch) {
  if (batch < 1) throw ConfigError("batch must be >= 1");
  std::vector<Image> out;
  for (int start = 0, b = 0; start < count; start += batch, ++b) {
    const int n = std::min(batch, count - start);
    Tensor x = Sample(denoiser, sampler, schedule, {n, 1, side, side},
                      DeriveSeed(seed, static_cast<uint64_t>(b)));
    for (Image& img : ToImages(x)) out.push_back(Quantize8(img));
  }
  return out;
}

size_t SelectModel(const std::vector<double>& fid_curve) {
  if (fid_curve.empty()) throw InputError("model selection needs a nonempty FID curve");
  size_t best = 0;
  for (size_t i = 1; i < fid_curve.size(); ++i) {
    if (fid_curve[i] <= fid_curve[best]) best = i;
  }
  return best;
}

TrainResult TrainDenoiser(
    const std::vector<Image>& dataset, const UNetConfig& unet,
    const TrainConfig& config, const std::vector<Image>& fid_reference,
    const fs::path& out_dir, const NoiseSchedule& schedule,
    const std::vector<std::pair<std::string, std::string>>& extra_meta,
    const LogFn& log) {
  config.Validate();
  unet.Validate();
  if (dataset.empty()) throw ConfigError("denoiser training set is empty");
  const int side = dataset[0].width;
  for (const Image& img : dataset) {
    if (img.width != side || img.height != side) {
      throw ShapeError("training images must be square and equally sized");
    }
  }
  const bool use_fid = !fid_reference.empty();
  FeatureStats ref_stats;
  if (use_fid) ref_stats = GaussianStats(fid_reference);
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string());
  }

  TrainResult result;
  result.params = InitUNet(unet, DeriveSeed(config.seed, 0));
  result.ema = result.params;
  nn::OptState opt = nn::InitOptState(result.params);
  nn::AdamWConfig adam;
  adam.lr = config.lr;
  adam.weight_decay = config.weight_decay;
  Rng rng(DeriveSeed(config.seed, 1));
  const uint64_t fid_seed = DeriveSeed(config.seed, 2);

  auto evaluate_fid = [&]() {
    UNetDenoiser denoiser(result.ema, unet);
    const std::vector<Image> samples = GenerateImages(
        denoiser, config.fid_sampler, schedule, side, config.fid_samples, fid_seed);
    return FrechetDistance(GaussianStats(samples), ref_stats);
  };
  auto checkpoint = [&](int epoch, double fid) {
    if (out_dir.empty()) return;
    char name[64];
    std::snprintf(name, sizeof(name), "ckpt_epoch%04d.bin", epoch);
    DenoiserCheckpoint ckpt{epoch, unet, result.params, result.ema, extra_meta};
    if (use_fid) ckpt.meta.emplace_back("fid", FormatDouble(fid));
    SaveDenoiserCheckpoint(out_dir / name, ckpt);
    result.checkpoints.push_back(out_dir / name);
    result.checkpoint_epochs.push_back(epoch);
  };

  if (use_fid) {
    result.initial_fid = evaluate_fid();
    if (log) log("epoch 0 fid " + FormatDouble(result.initial_fid));
  }
  checkpoint(0, result.initial_fid);

  std::vector<size_t> order(dataset.size());
  const size_t per = static_cast<size_t>(side) * side;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(order);
    double epoch_loss = 0.0;
    int steps = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const int n = static_cast<int>(
          std::min<size_t>(config.batch_size, order.size() - start));
      TrainBatch batch{Tensor({n, 1, side, side}), Tensor({n, 1, side, side}), {}};
      for (int i = 0; i < n; ++i) {
        const Image& img = dataset[order[start + i]];
        std::copy(img.pixels.begin(), img.pixels.end(), batch.x0.data.begin() + i * per);
        batch.t.push_back(static_cast<int>(rng.UniformInt(0, schedule.num_steps - 1)));
      }
      for (double& v : batch.noise.data) v = rng.Normal();
      GradResult g = DenoiserGrad(result.params, unet, batch, schedule);
      if (!std::isfinite(g.loss) || !g.grads.AllFinite()) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                           ", step " + std::to_string(opt.step + 1));
      }
      nn::AdamWStep(result.params, g.grads, opt, adam);
      const double decay = config.ema_warmup
                               ? nn::EmaWarmupDecay(config.ema_decay, opt.step)
                               : config.ema_decay;
      nn::EmaUpdate(result.ema, result.params, decay);
      result.loss_curve.push_back(g.loss);
      epoch_loss += g.loss;
      ++steps;
    }
    std::string line = "epoch " + std::to_string(epoch) + " loss " +
                       FormatDouble(epoch_loss / std::max(1, steps));
    if (epoch % config.fid_every_epochs == 0) {
      double fid = 0.0;
      if (use_fid) {
        fid = evaluate_fid();
        result.fid_curve.push_back({epoch, fid});
        line += " fid " + FormatDouble(fid);
      }
      checkpoint(epoch, fid);
    }
    if (log) log(line);
  }
  return result;
}

}  // namespace brightsynth
