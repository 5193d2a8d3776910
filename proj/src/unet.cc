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
#include "brightsynth/unet.h"

#include <cmath>
#include <string>

#include "brightsynth/errors.h"
#include "brightsynth/nn/ops.h"
#include "brightsynth/rng.h"

namespace brightsynth {

using nn::ParamSet;
using nn::Shape;
using nn::Tape;
using nn::Tensor;
using nn::Var;

void UNetConfig::Validate() const {
  if (block_channels.empty()) throw ConfigError("U-Net needs at least one level");
  for (int c : block_channels) {
    if (c < 1) throw ConfigError("U-Net channel counts must be positive");
  }
  if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
    throw ConfigError("time_embed_dim must be even and >= 2");
  }
  if (attention) throw ConfigError("attention blocks are not supported");
}

namespace {

Tensor HeNormal(Rng& rng, Shape shape, int fan_in) {
  Tensor t(shape);
  const double std = std::sqrt(2.0 / fan_in);
  for (double& v : t.data) v = std * rng.Normal();
  return t;
}

void AddConv(ParamSet& p, Rng& rng, const std::string& name, int cin, int cout,
             int k) {
  p.Add(name + ".w", HeNormal(rng, {cout, cin, k, k}, cin * k * k));
  p.Add(name + ".b", Tensor({1, cout, 1, 1}));
}

void AddScaleShift(ParamSet& p, const std::string& name, int c) {
  p.Add(name + ".s", Tensor({1, c, 1, 1}, 1.0));
  p.Add(name + ".b", Tensor({1, c, 1, 1}));
}

void AddResBlock(ParamSet& p, Rng& rng, const std::string& name, int cin,
                 int cout, int embed) {
  AddScaleShift(p, name + ".n1", cin);
  AddConv(p, rng, name + ".c1", cin, cout, 3);
  AddConv(p, rng, name + ".t", embed, cout, 1);
  AddScaleShift(p, name + ".n2", cout);
  AddConv(p, rng, name + ".c2", cout, cout, 3);
  // Residual branch starts as the identity.
  p.at(name + ".c2.w").data.assign(p.at(name + ".c2.w").size(), 0.0);
  if (cin != cout) AddConv(p, rng, name + ".skip", cin, cout, 1);
}

struct Builder {
  Tape& tape;
  const ParamSet& params;

  Var P(const std::string& name) { return tape.Param(params, name); }

  Var Conv(Var x, const std::string& name, int stride = 1) {
    return nn::Conv2d(tape, x, P(name + ".w"), P(name + ".b"), stride);
  }

  Var Norm(Var x, const std::string& name) {
    return nn::ScaleShift(tape, x, P(name + ".s"), P(name + ".b"));
  }

  Var ResBlock(Var x, Var emb, const std::string& name) {
    Var h = Conv(nn::Silu(tape, Norm(x, name + ".n1")), name + ".c1");
    Var temb = nn::Linear(tape, emb, P(name + ".t.w"), P(name + ".t.b"));
    h = nn::AddChannelBias(tape, h, temb);
    h = Conv(nn::Silu(tape, Norm(h, name + ".n2")), name + ".c2");
    Var skip = params.contains(name + ".skip.w") ? Conv(x, name + ".skip") : x;
    return nn::Add(tape, skip, h);
  }
};

}  // namespace

ParamSet InitUNet(const UNetConfig& config, uint64_t seed) {
  config.Validate();
  Rng rng(seed);
  ParamSet p;
  const int e = config.time_embed_dim;
  const auto& ch = config.block_channels;
  const int levels = config.levels();
  p.Add("time.w", HeNormal(rng, {e, e, 1, 1}, e));
  p.Add("time.b", Tensor({1, e, 1, 1}));
  AddConv(p, rng, "in", 1, ch[0], 3);
  int cur = ch[0];
  for (int l = 0; l < levels; ++l) {
    const std::string name = "down" + std::to_string(l);
    AddResBlock(p, rng, name + ".res", cur, ch[l], e);
    cur = ch[l];
    if (l + 1 < levels) AddConv(p, rng, name + ".ds", cur, cur, 3);
  }
  AddResBlock(p, rng, "mid", cur, cur, e);
  for (int l = levels - 1; l >= 0; --l) {
    const std::string name = "up" + std::to_string(l);
    AddResBlock(p, rng, name + ".res", cur + ch[l], ch[l], e);
    cur = ch[l];
    if (l > 0) AddConv(p, rng, name + ".us", cur, cur, 3);
  }
  AddScaleShift(p, "out.n", cur);
  p.Add("out.w", Tensor({1, cur, 3, 3}));
  p.Add("out.b", Tensor({1, 1, 1, 1}));
  return p;
}

Tensor TimestepEmbedding(const std::vector<int>& t, int dim) {
  const int half = dim / 2;
  Tensor emb({static_cast<int>(t.size()), dim, 1, 1});
  for (size_t i = 0; i < t.size(); ++i) {
    for (int k = 0; k < half; ++k) {
      const double freq = std::exp(-std::log(10000.0) * k / half);
      emb.at(static_cast<int>(i), k, 0, 0) = std::sin(t[i] * freq);
      emb.at(static_cast<int>(i), half + k, 0, 0) = std::cos(t[i] * freq);
    }
  }
  return emb;
}

Var UNetForward(Tape& tape, const ParamSet& params, const UNetConfig& config,
                Var x, const std::vector<int>& t) {
  const Shape s = tape.value(x).shape;
  const int levels = config.levels();
  const int factor = 1 << (levels - 1);
  if (s.c != 1 || s.h != s.w || s.h % factor != 0) {
    throw ShapeError("U-Net input must be single-channel, square, side divisible by " +
                     std::to_string(factor) + "; got " + s.str());
  }
  if (t.size() != static_cast<size_t>(s.n)) {
    throw ShapeError("one timestep per batch element required");
  }
  Builder b{tape, params};
  Var emb = tape.Constant(TimestepEmbedding(t, config.time_embed_dim));
  emb = nn::Silu(tape, nn::Linear(tape, emb, b.P("time.w"), b.P("time.b")));

  Var h = b.Conv(x, "in");
  std::vector<Var> skips;
  for (int l = 0; l < levels; ++l) {
    const std::string name = "down" + std::to_string(l);
    h = b.ResBlock(h, emb, name + ".res");
    skips.push_back(h);
    if (l + 1 < levels) h = b.Conv(h, name + ".ds", 2);
  }
  h = b.ResBlock(h, emb, "mid");
  for (int l = levels - 1; l >= 0; --l) {
    const std::string name = "up" + std::to_string(l);
    h = b.ResBlock(nn::Concat(tape, h, skips[l]), emb, name + ".res");
    if (l > 0) h = b.Conv(nn::Upsample2(tape, h), name + ".us");
  }
  h = nn::Silu(tape, b.Norm(h, "out.n"));
  return nn::Conv2d(tape, h, b.P("out.w"), b.P("out.b"));
}

Tensor UNetPredict(const ParamSet& params, const UNetConfig& config,
                   const Tensor& x, const std::vector<int>& t) {
  Tape tape;
  Var in = tape.Constant(x);
  return tape.value(UNetForward(tape, params, config, in, t));
}

}  // namespace brightsynth
