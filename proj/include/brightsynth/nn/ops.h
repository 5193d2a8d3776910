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
#ifndef BRIGHTSYNTH_NN_OPS_H_
#define BRIGHTSYNTH_NN_OPS_H_

#include "brightsynth/nn/tape.h"

namespace brightsynth::nn {

// weight [Cout, Cin, k, k], bias [1, Cout, 1, 1]; zero padding k/2.
Var Conv2d(Tape& tape, Var x, Var weight, Var bias, int stride = 1);

Var Add(Tape& tape, Var a, Var b);
// x [N,C,H,W] + v [N,C,1,1] broadcast over the spatial plane.
Var AddChannelBias(Tape& tape, Var x, Var v);
// Per-channel affine: x * scale + shift with scale/shift [1,C,1,1].
Var ScaleShift(Tape& tape, Var x, Var scale, Var shift);
Var Silu(Tape& tape, Var x);
Var Sigmoid(Tape& tape, Var x);
// Nearest-neighbour 2x upsampling.
Var Upsample2(Tape& tape, Var x);
// Channel concatenation.
Var Concat(Tape& tape, Var a, Var b);
// x [N,F,1,1], weight [Out,F,1,1], bias [1,Out,1,1] -> [N,Out,1,1].
Var Linear(Tape& tape, Var x, Var weight, Var bias);
Var Scale(Tape& tape, Var x, double factor);

// Scalar losses.
Var MseLoss(Tape& tape, Var pred, Var target);
// Penalty-reduced pixel-wise focal loss on logits (alpha=2, beta=4), summed
// and divided by `normalizer`.
Var FocalLoss(Tape& tape, Var logits, const Tensor& target, double normalizer);
// sum(mask * |pred - target|) / normalizer; mask [N,1,H,W] broadcasts over C.
Var MaskedL1(Tape& tape, Var pred, const Tensor& target, const Tensor& mask,
             double normalizer);

}  // namespace brightsynth::nn

#endif  // BRIGHTSYNTH_NN_OPS_H_
